// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include "ape/gas.hpp"
#include "ape/hooks.hpp"
#include "ape/state.hpp"

namespace ape
{
/// Applies `tx` to `state` in place and returns the outcome. Invalid
/// transactions (bad nonce, underfunded sender, intrinsic gas above the
/// limit) surface as HaltError results with the state untouched. Runtime
/// failures leave only the sender nonce bump and the gas debit behind; the
/// fee for consumed gas is credited to the block coinbase.
ExecutionResult execute_transaction(WorldState& state, const Transaction& tx,
                                    const GasTable& gas, HookSet* hooks = nullptr);

enum class DeployMode
{
    InitCode,       // bytes are constructor code; its RETURN value is installed
    DirectRuntime,  // bytes are installed verbatim
};

struct DeployError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};
struct AddressCollisionError : DeployError
{
    using DeployError::DeployError;
};

struct DeployOutcome
{
    Address address{};
    uint64_t gas_used = 0;  // execution (init mode) plus per-byte deposit
};

/// Installs a contract at the standard creation address derived from
/// (creator, creator nonce) and bumps the creator nonce. `storage_init`
/// seeds the new account's storage; the per-slot cost is included in
/// gas_used. No balance is debited here; fee accounting is the caller's
/// concern. Throws AddressCollisionError if the slot is taken.
DeployOutcome deploy_contract(WorldState& state, const Address& creator, BytesView code,
                              DeployMode mode, const GasTable& gas,
                              const std::map<Word, Word>& storage_init = {},
                              uint64_t gas_limit = 10'000'000);

/// Intrinsic cost of a transaction: base plus per-byte calldata.
uint64_t intrinsic_gas(const Transaction& tx, const GasTable& gas);

}  // namespace ape
