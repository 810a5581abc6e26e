// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include "ape/fixtures.hpp"

namespace ape::canned
{
// Reference bytecode used by the scenario corpus. Everything here is
// hand-assembled; selectors follow the usual 4-byte convention so the
// calldata in fixtures reads like ordinary contract calls.

uint32_t selector(const std::string& signature);
Word selector_word(const std::string& signature);  // selector shifted into the top 4 bytes

Word erc20_transfer_topic();
Word erc20_approval_topic();

/// Solidity mapping slot: keccak(key32 ++ base32).
Word map_slot(const Word& key, const Word& base);
Word erc20_balance_slot(const Address& owner);
Word erc20_allowance_slot(const Address& owner, const Address& spender);

// tokens: balances at slot base 0, allowances at base 1, total supply at 2
Bytes erc20_runtime();
Bytes mintable_erc20_runtime();  // adds increaseAllowance() which mints to the spender

/// Constant-product pool. Token address at slot 0, token reserve at slot 1,
/// native reserve at slot 2. sellToken(uint256) pulls tokens via
/// transferFrom and pays out native currency.
Bytes amm_pool_runtime();

/// Caller-gate in front of a payout: authentication block pinned at code
/// offset 0xb0c, JUMPI at 0xb27, payout block at 0xb2c. When the gate
/// passes, pulls a reward from `pool` and forwards this contract's whole
/// balance to the caller. `origin_auth` switches the gate from CALLER to
/// ORIGIN.
Bytes guard_runtime(const Address& authorized, const Address& pool, bool origin_auth = false);

/// Pays the amount in slot 0 to whoever calls it.
Bytes liq_pool_runtime();

/// Forwards a call to a hard-coded target, then forwards any received
/// balance to its own caller.
Bytes wrapper_runtime(const Address& target);
/// Same, but the target address is read from storage slot 0.
Bytes wrapper_storage_runtime();

// massDeposit pair: the depositer approves the caller-supplied vault and
// pushes token amounts into it, then hands the vault an owner address.
Bytes depositer_runtime();
Bytes vault_runtime();

/// redeemTo(address): sends the native amount in slot 0 to the given
/// address. Contains no environment opcodes at all.
Bytes redeemer_runtime();

/// withdraw(bytes32,uint8,bytes32,bytes32): signature-gated payout through
/// the ecrecover precompile address.
Bytes ecdsa_vault_runtime();

/// Three bytes of nothing; exists to receive tokens.
Bytes sink_runtime();
/// poke(address): transfers slot-0 tokens of a hard-coded token to the
/// given address, then calls it.
Bytes poker_runtime(const Address& token);

// fixed cast of the scenario corpus
Address victim_eoa();   // 0x53d8...0d81
Address adversary();    // 0xabcd...abcd
Address coinbase();
Address guard_addr();
Address liq_pool_addr();
Address token_addr();
Address amm_addr();
Address depositer_addr();
Address vault_addr();
Address redeemer_addr();
Address ecdsa_vault_addr();
Address sink_addr();
Address poker_addr();
Address wrapper_addr();

ScenarioBundle guard_scenario();
ScenarioBundle wrapped_guard_scenario();
ScenarioBundle wrapped_guard_storage_scenario();
ScenarioBundle massdeposit_scenario();
ScenarioBundle mint_swap_scenario();
ScenarioBundle redeem_scenario();
ScenarioBundle ecdsa_vault_scenario();
ScenarioBundle tiny_sink_scenario();

std::vector<std::pair<std::string, ScenarioBundle>> all_scenarios();

}  // namespace ape::canned
