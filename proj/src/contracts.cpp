// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#include "ape/contracts.hpp"

#include "ape/assembler.hpp"

namespace ape::canned
{
namespace
{
const Word kEther = Word("1000000000000000000");
const Word kGwei = Word("1000000000");

Address addr_from_u16(uint16_t tag)
{
    Address a{};
    a.bytes[18] = static_cast<uint8_t>(tag >> 8);
    a.bytes[19] = static_cast<uint8_t>(tag & 0xff);
    return a;
}

// [key] -> [keccak(key32 ++ base32)], clobbers memory[0..64)
void emit_map_slot(Assembler& a, const Word& base)
{
    a.push(0).op(OP_MSTORE);
    a.push(base).push(32).op(OP_MSTORE);
    a.push(64).push(0).op(OP_KECCAK256);
}

// selector switch header; leaves the selector on the stack for the cascade
void emit_dispatcher_head(Assembler& a)
{
    a.push(0).op(OP_CALLDATALOAD).push(0xe0).op(OP_SHR);
}

void emit_dispatch(Assembler& a, const std::string& sig, const std::string& label)
{
    a.op(OP_DUP1).push(Word{selector(sig)}, 4).op(OP_EQ).push_label(label).op(OP_JUMPI);
}

void emit_fn_prologue(Assembler& a, const std::string& label)
{
    a.label(label).op(OP_JUMPDEST).op(OP_POP);
}

void emit_revert_block(Assembler& a, const std::string& label = "revert")
{
    a.label(label).op(OP_JUMPDEST).push(0).op(OP_DUP1).op(OP_REVERT);
}

// [] -> []; return true as a 32-byte word
void emit_return_true(Assembler& a)
{
    a.push(1).push(0).op(OP_MSTORE).push(32).push(0).op(OP_RETURN);
}

// [] -> []; emits Transfer/Approval-style LOG3 with amount in memory[0..32)
void emit_log3_amount(Assembler& a, const Word& topic)
{
    // callers must have pushed [t3, t2] (to, from) beforehand
    a.push(topic, 32).push(32).push(0).op(OP_LOG3);
}

void emit_erc20(Assembler& a, bool mintable)
{
    emit_dispatcher_head(a);
    emit_dispatch(a, "transfer(address,uint256)", "fn_transfer");
    emit_dispatch(a, "transferFrom(address,address,uint256)", "fn_transferFrom");
    emit_dispatch(a, "approve(address,uint256)", "fn_approve");
    emit_dispatch(a, "balanceOf(address)", "fn_balanceOf");
    if (mintable)
        emit_dispatch(a, "increaseAllowance(address,uint256)", "fn_increaseAllowance");
    a.op(OP_STOP);

    // transfer(address to, uint256 amount)
    emit_fn_prologue(a, "fn_transfer");
    a.op(OP_CALLER);
    emit_map_slot(a, 0);                                    // [slot_from]
    a.op(OP_DUP1).op(OP_SLOAD);                             // [slot_from, bal]
    a.op(OP_DUP1).push(36).op(OP_CALLDATALOAD);             // [slot_from, bal, bal, amt]
    a.op(OP_GT).push_label("revert").op(OP_JUMPI);          // [slot_from, bal]
    a.push(36).op(OP_CALLDATALOAD).op(OP_SWAP1).op(OP_SUB); // [slot_from, bal-amt]
    a.op(OP_SWAP1).op(OP_SSTORE);                           // []
    a.push(4).op(OP_CALLDATALOAD);
    emit_map_slot(a, 0);                                    // [slot_to]
    a.op(OP_DUP1).op(OP_SLOAD);                             // [slot_to, bal_to]
    a.push(36).op(OP_CALLDATALOAD).op(OP_ADD);              // [slot_to, bal_to+amt]
    a.op(OP_SWAP1).op(OP_SSTORE);                           // []
    a.push(36).op(OP_CALLDATALOAD).push(0).op(OP_MSTORE);   // mem0 = amt
    a.push(4).op(OP_CALLDATALOAD).op(OP_CALLER);            // [to, from]
    emit_log3_amount(a, erc20_transfer_topic());
    emit_return_true(a);

    // transferFrom(address from, address to, uint256 amount)
    emit_fn_prologue(a, "fn_transferFrom");
    a.push(4).op(OP_CALLDATALOAD);
    emit_map_slot(a, 1);                                    // [inner]
    a.op(OP_CALLER).push(0).op(OP_MSTORE);                  // mem0 = spender(caller)
    a.push(32).op(OP_MSTORE);                               // mem32 = inner; []
    a.push(64).push(0).op(OP_KECCAK256);                    // [slot_allow]
    a.op(OP_DUP1).op(OP_SLOAD);                             // [sa, allow]
    a.op(OP_DUP1).push(68).op(OP_CALLDATALOAD);             // [sa, allow, allow, amt]
    a.op(OP_GT).push_label("revert").op(OP_JUMPI);          // [sa, allow]
    a.push(68).op(OP_CALLDATALOAD).op(OP_SWAP1).op(OP_SUB); // [sa, allow-amt]
    a.op(OP_SWAP1).op(OP_SSTORE);                           // []
    a.push(4).op(OP_CALLDATALOAD);
    emit_map_slot(a, 0);                                    // [slot_from]
    a.op(OP_DUP1).op(OP_SLOAD);                             // [sf, bal]
    a.op(OP_DUP1).push(68).op(OP_CALLDATALOAD);
    a.op(OP_GT).push_label("revert").op(OP_JUMPI);          // [sf, bal]
    a.push(68).op(OP_CALLDATALOAD).op(OP_SWAP1).op(OP_SUB);
    a.op(OP_SWAP1).op(OP_SSTORE);                           // []
    a.push(36).op(OP_CALLDATALOAD);
    emit_map_slot(a, 0);                                    // [slot_to]
    a.op(OP_DUP1).op(OP_SLOAD);
    a.push(68).op(OP_CALLDATALOAD).op(OP_ADD);
    a.op(OP_SWAP1).op(OP_SSTORE);                           // []
    a.push(68).op(OP_CALLDATALOAD).push(0).op(OP_MSTORE);
    a.push(36).op(OP_CALLDATALOAD).push(4).op(OP_CALLDATALOAD);  // [to, from]
    emit_log3_amount(a, erc20_transfer_topic());
    emit_return_true(a);

    // approve(address spender, uint256 amount)
    emit_fn_prologue(a, "fn_approve");
    a.op(OP_CALLER);
    emit_map_slot(a, 1);                                    // [inner]
    a.push(4).op(OP_CALLDATALOAD).push(0).op(OP_MSTORE);    // mem0 = spender
    a.push(32).op(OP_MSTORE);                               // mem32 = inner
    a.push(64).push(0).op(OP_KECCAK256);                    // [slot]
    a.push(36).op(OP_CALLDATALOAD).op(OP_SWAP1).op(OP_SSTORE);
    a.push(36).op(OP_CALLDATALOAD).push(0).op(OP_MSTORE);
    a.push(4).op(OP_CALLDATALOAD).op(OP_CALLER);            // [spender, owner]
    emit_log3_amount(a, erc20_approval_topic());
    emit_return_true(a);

    // balanceOf(address)
    emit_fn_prologue(a, "fn_balanceOf");
    a.push(4).op(OP_CALLDATALOAD);
    emit_map_slot(a, 0);
    a.op(OP_SLOAD).push(0).op(OP_MSTORE).push(32).push(0).op(OP_RETURN);

    if (mintable)
    {
        // increaseAllowance(address spender, uint256 addedValue): the faulty
        // mint path, allowance bump plus an unconditional mint to `spender`
        emit_fn_prologue(a, "fn_increaseAllowance");
        a.op(OP_CALLER);
        emit_map_slot(a, 1);                                 // [inner]
        a.push(4).op(OP_CALLDATALOAD).push(0).op(OP_MSTORE);
        a.push(32).op(OP_MSTORE);
        a.push(64).push(0).op(OP_KECCAK256);                 // [slot_allow]
        a.op(OP_DUP1).op(OP_SLOAD);
        a.push(36).op(OP_CALLDATALOAD).op(OP_ADD);
        a.op(OP_SWAP1).op(OP_SSTORE);                        // []
        a.push(36).op(OP_CALLDATALOAD).push(0).op(OP_MSTORE);
        a.push(4).op(OP_CALLDATALOAD).op(OP_CALLER);
        emit_log3_amount(a, erc20_approval_topic());
        // mint
        a.push(4).op(OP_CALLDATALOAD);
        emit_map_slot(a, 0);                                 // [slot_spender]
        a.op(OP_DUP1).op(OP_SLOAD);
        a.push(36).op(OP_CALLDATALOAD).op(OP_ADD);
        a.op(OP_SWAP1).op(OP_SSTORE);
        a.push(2).op(OP_SLOAD).push(36).op(OP_CALLDATALOAD).op(OP_ADD).push(2).op(OP_SSTORE);
        a.push(36).op(OP_CALLDATALOAD).push(0).op(OP_MSTORE);
        a.push(4).op(OP_CALLDATALOAD).push(0);               // [to, from=0]
        emit_log3_amount(a, erc20_transfer_topic());
        emit_return_true(a);
    }

    emit_revert_block(a);
}
}  // namespace

uint32_t selector(const std::string& signature)
{
    auto h = keccak256(BytesView{reinterpret_cast<const uint8_t*>(signature.data()),
                                 signature.size()});
    return static_cast<uint32_t>(h[0]) << 24 | static_cast<uint32_t>(h[1]) << 16 |
           static_cast<uint32_t>(h[2]) << 8 | static_cast<uint32_t>(h[3]);
}

Word selector_word(const std::string& signature)
{
    return Word{selector(signature)} << 224;
}

Word erc20_transfer_topic()
{
    static const Word topic = [] {
        std::string sig = "Transfer(address,address,uint256)";
        return keccak256_word(BytesView{reinterpret_cast<const uint8_t*>(sig.data()), sig.size()});
    }();
    return topic;
}

Word erc20_approval_topic()
{
    static const Word topic = [] {
        std::string sig = "Approval(address,address,uint256)";
        return keccak256_word(BytesView{reinterpret_cast<const uint8_t*>(sig.data()), sig.size()});
    }();
    return topic;
}

Word map_slot(const Word& key, const Word& base)
{
    uint8_t buf[64];
    auto kb = to_bytes32(key);
    auto bb = to_bytes32(base);
    std::copy(kb.begin(), kb.end(), buf);
    std::copy(bb.begin(), bb.end(), buf + 32);
    return keccak256_word(BytesView{buf, 64});
}

Word erc20_balance_slot(const Address& owner)
{
    return map_slot(word_from_address(owner), 0);
}

Word erc20_allowance_slot(const Address& owner, const Address& spender)
{
    return map_slot(word_from_address(spender), map_slot(word_from_address(owner), 1));
}

Bytes erc20_runtime()
{
    Assembler a;
    emit_erc20(a, false);
    return a.assemble();
}

Bytes mintable_erc20_runtime()
{
    Assembler a;
    emit_erc20(a, true);
    return a.assemble();
}

Bytes amm_pool_runtime()
{
    Assembler a;
    emit_dispatcher_head(a);
    emit_dispatch(a, "sellToken(uint256)", "fn_sell");
    a.op(OP_STOP);

    emit_fn_prologue(a, "fn_sell");
    // token.transferFrom(caller, this, amountIn); args in memory[0..100)
    a.push(selector_word("transferFrom(address,address,uint256)"), 32).push(0).op(OP_MSTORE);
    a.op(OP_CALLER).push(4).op(OP_MSTORE);
    a.op(OP_ADDRESS).push(36).op(OP_MSTORE);
    a.push(4).op(OP_CALLDATALOAD).push(68).op(OP_MSTORE);
    a.push(32).push(128).push(100).push(0).push(0);  // retSize retOff argSize argOff value
    a.push(0).op(OP_SLOAD).op(OP_GAS).op(OP_CALL);   // [ok]
    a.op(OP_ISZERO).push_label("revert").op(OP_JUMPI);

    // out = in*997*reserveE / (reserveToken*1000 + in*997)
    a.push(4).op(OP_CALLDATALOAD).push(997).op(OP_MUL);  // [a997]
    a.op(OP_DUP1).push(2).op(OP_SLOAD).op(OP_MUL);       // [a997, num]
    a.push(1).op(OP_SLOAD).push(1000).op(OP_MUL);        // [a997, num, rt1000]
    a.op(static_cast<uint8_t>(OP_DUP1 + 2)).op(OP_ADD);  // DUP3                            // [a997, num, den]
    a.op(OP_SWAP1).op(OP_DIV);                           // [a997, out]

    // reserveToken += in; reserveE -= out
    a.push(1).op(OP_SLOAD).push(4).op(OP_CALLDATALOAD).op(OP_ADD).push(1).op(OP_SSTORE);
    a.push(2).op(OP_SLOAD).op(static_cast<uint8_t>(OP_DUP1 + 1));  // DUP2
    a.op(OP_SWAP1).op(OP_SUB).push(2).op(OP_SSTORE);

    // pay the caller
    a.push(0).push(0).push(0).push(0);                   // [a997, out, 0,0,0,0]
    a.op(static_cast<uint8_t>(OP_DUP1 + 4)).op(OP_CALLER).op(OP_GAS).op(OP_CALL);  // DUP5  // [a997, out, ok]
    a.op(OP_ISZERO).push_label("revert").op(OP_JUMPI);   // [a997, out]
    a.push(0).op(OP_MSTORE).op(OP_POP);                  // mem0 = out
    a.push(32).push(0).op(OP_RETURN);

    emit_revert_block(a);
    return a.assemble();
}

Bytes guard_runtime(const Address& authorized, const Address& pool, bool origin_auth)
{
    Assembler a;
    a.push_label("gate").op(OP_JUMP);
    a.pad_to(0xb0c, 0x00);

    a.label("gate").op(OP_JUMPDEST);                 // 0xb0c
    a.op(origin_auth ? OP_ORIGIN : OP_CALLER);       // 0xb0d
    a.push_address(authorized);                      // 0xb0e
    a.op(OP_EQ);                                     // 0xb23
    a.push_label("body");                            // 0xb24
    a.op(OP_JUMPI);                                  // 0xb27
    a.push(0, 1);                                    // 0xb28
    a.op(OP_DUP1);                                   // 0xb2a
    a.op(OP_REVERT);                                 // 0xb2b

    a.label("body").op(OP_JUMPDEST);                 // 0xb2c
    // pull the payout from the pool
    a.push(0).push(0).push(0).push(0).push(0);
    a.push_address(pool).op(OP_GAS).op(OP_CALL).op(OP_POP);
    // forward everything to the caller
    a.push(0).push(0).push(0).push(0).op(OP_SELFBALANCE);
    a.op(OP_CALLER).op(OP_GAS).op(OP_CALL).op(OP_POP);
    a.op(OP_STOP);

    Bytes code = a.assemble();
    // the figure-pinned offsets are load-bearing for the whole corpus
    if (code[0xb0c] != OP_JUMPDEST || code[0xb27] != OP_JUMPI || code[0xb2c] != OP_JUMPDEST)
        throw AssemblyError("guard layout drifted from the pinned offsets");
    return code;
}

Bytes liq_pool_runtime()
{
    Assembler a;
    a.push(0).push(0).push(0).push(0);
    a.push(0).op(OP_SLOAD);  // reward amount
    a.op(OP_CALLER).op(OP_GAS).op(OP_CALL).op(OP_POP);
    a.op(OP_STOP);
    return a.assemble();
}

namespace
{
Bytes wrapper_common(const std::optional<Address>& target)
{
    Assembler a;
    a.push(0).push(0).push(0).push(0).push(0);
    if (target)
        a.push_address(*target);
    else
        a.push(0).op(OP_SLOAD);
    a.op(OP_GAS).op(OP_CALL).op(OP_POP);
    a.push(0).push(0).push(0).push(0).op(OP_SELFBALANCE);
    a.op(OP_CALLER).op(OP_GAS).op(OP_CALL).op(OP_POP);
    a.op(OP_STOP);
    return a.assemble();
}
}  // namespace

Bytes wrapper_runtime(const Address& target)
{
    return wrapper_common(target);
}

Bytes wrapper_storage_runtime()
{
    return wrapper_common(std::nullopt);
}

Bytes depositer_runtime()
{
    // calldata: sel | vault | token | nl | na | (usr_i, amt_i) pairs
    Assembler a;
    emit_dispatcher_head(a);
    emit_dispatch(a, "massDeposit(address,address,address[],uint256[])", "fn_massDeposit");
    a.op(OP_STOP);

    emit_fn_prologue(a, "fn_massDeposit");
    // token.approve(vault, 2**256 - 1)
    a.push(selector_word("approve(address,uint256)"), 32).push(0).op(OP_MSTORE);
    a.push(4).op(OP_CALLDATALOAD).push(4).op(OP_MSTORE);
    a.push(~Word{0}, 32).push(36).op(OP_MSTORE);
    a.push(0).push(0).push(68).push(0).push(0);
    a.push(36).op(OP_CALLDATALOAD).op(OP_GAS).op(OP_CALL).op(OP_POP);

    // require(lst.length == amt.length)
    a.push(68).op(OP_CALLDATALOAD).push(100).op(OP_CALLDATALOAD);
    a.op(OP_EQ).push_label("len_ok").op(OP_JUMPI);
    a.push(0).op(OP_DUP1).op(OP_REVERT);

    a.label("len_ok").op(OP_JUMPDEST);
    a.push(0);  // [i]
    a.label("loop").op(OP_JUMPDEST);
    a.op(OP_DUP1).push(68).op(OP_CALLDATALOAD);
    a.op(OP_EQ).push_label("done").op(OP_JUMPI);         // [i]
    // vault.depositOnBehalf(lst[i], amt[i])
    a.push(selector_word("depositOnBehalf(address,uint256)"), 32).push(0).op(OP_MSTORE);
    a.op(OP_DUP1).push(64).op(OP_MUL).push(132).op(OP_ADD);  // [i, off]
    a.op(OP_DUP1).op(OP_CALLDATALOAD).push(4).op(OP_MSTORE); // [i, off]
    a.push(32).op(OP_ADD).op(OP_CALLDATALOAD).push(36).op(OP_MSTORE);  // [i]
    a.push(0).push(0).push(68).push(0).push(0);
    a.push(4).op(OP_CALLDATALOAD).op(OP_GAS).op(OP_CALL).op(OP_POP);
    a.push(1).op(OP_ADD);                                // [i+1]
    a.push_label("loop").op(OP_JUMP);

    a.label("done").op(OP_JUMPDEST).op(OP_POP);
    // vault.setOwner(owner)
    a.push(selector_word("setOwner(address)"), 32).push(0).op(OP_MSTORE);
    a.push(0).op(OP_SLOAD).push(4).op(OP_MSTORE);
    a.push(0).push(0).push(36).push(0).push(0);
    a.push(4).op(OP_CALLDATALOAD).op(OP_GAS).op(OP_CALL).op(OP_POP);
    a.op(OP_STOP);
    return a.assemble();
}

Bytes vault_runtime()
{
    // slot 0: owner, slot 1: token, slot 2: per-user credit mapping base
    Assembler a;
    emit_dispatcher_head(a);
    emit_dispatch(a, "depositOnBehalf(address,uint256)", "fn_deposit");
    emit_dispatch(a, "setOwner(address)", "fn_setOwner");
    a.op(OP_STOP);

    emit_fn_prologue(a, "fn_deposit");
    // token.transferFrom(msg.sender, this, amt)
    a.push(selector_word("transferFrom(address,address,uint256)"), 32).push(0).op(OP_MSTORE);
    a.op(OP_CALLER).push(4).op(OP_MSTORE);
    a.op(OP_ADDRESS).push(36).op(OP_MSTORE);
    a.push(36).op(OP_CALLDATALOAD).push(68).op(OP_MSTORE);
    a.push(0).push(0).push(100).push(0).push(0);
    a.push(1).op(OP_SLOAD).op(OP_GAS).op(OP_CALL);
    a.op(OP_ISZERO).push_label("revert").op(OP_JUMPI);
    // credit[usr] += amt
    a.push(4).op(OP_CALLDATALOAD);
    emit_map_slot(a, 2);
    a.op(OP_DUP1).op(OP_SLOAD);
    a.push(36).op(OP_CALLDATALOAD).op(OP_ADD);
    a.op(OP_SWAP1).op(OP_SSTORE);
    a.op(OP_STOP);

    emit_fn_prologue(a, "fn_setOwner");
    a.push(4).op(OP_CALLDATALOAD).push(0).op(OP_SSTORE);
    a.op(OP_STOP);

    emit_revert_block(a);
    return a.assemble();
}

Bytes redeemer_runtime()
{
    Assembler a;
    emit_dispatcher_head(a);
    emit_dispatch(a, "redeemTo(address)", "fn_redeem");
    a.op(OP_STOP);

    emit_fn_prologue(a, "fn_redeem");
    a.push(0).push(0).push(0).push(0);
    a.push(0).op(OP_SLOAD);  // payout amount
    a.push(4).op(OP_CALLDATALOAD).op(OP_GAS).op(OP_CALL).op(OP_POP);
    a.op(OP_STOP);
    return a.assemble();
}

Bytes ecdsa_vault_runtime()
{
    Assembler a;
    emit_dispatcher_head(a);
    emit_dispatch(a, "withdraw(bytes32,uint8,bytes32,bytes32)", "fn_withdraw");
    a.op(OP_STOP);

    emit_fn_prologue(a, "fn_withdraw");
    a.push(4).op(OP_CALLDATALOAD).push(0).op(OP_MSTORE);
    a.push(36).op(OP_CALLDATALOAD).push(32).op(OP_MSTORE);
    a.push(68).op(OP_CALLDATALOAD).push(64).op(OP_MSTORE);
    a.push(100).op(OP_CALLDATALOAD).push(96).op(OP_MSTORE);
    // signer = ecrecover(hash, v, r, s)
    a.push(32).push(128).push(128).push(0).push(1).op(OP_GAS).op(OP_STATICCALL).op(OP_POP);
    a.push(128).op(OP_MLOAD);                       // [signer]
    a.op(OP_CALLER).op(OP_EQ).push_label("pay").op(OP_JUMPI);
    a.op(OP_STOP);

    a.label("pay").op(OP_JUMPDEST);
    a.push(0).push(0).push(0).push(0).op(OP_SELFBALANCE);
    a.op(OP_CALLER).op(OP_GAS).op(OP_CALL).op(OP_POP);
    a.op(OP_STOP);
    return a.assemble();
}

Bytes sink_runtime()
{
    Assembler a;
    a.op(OP_CALLDATASIZE).op(OP_POP).op(OP_STOP);
    return a.assemble();
}

Bytes poker_runtime(const Address& token)
{
    Assembler a;
    emit_dispatcher_head(a);
    emit_dispatch(a, "poke(address)", "fn_poke");
    a.op(OP_STOP);

    emit_fn_prologue(a, "fn_poke");
    // token.transfer(sink, slot0)
    a.push(selector_word("transfer(address,uint256)"), 32).push(0).op(OP_MSTORE);
    a.push(4).op(OP_CALLDATALOAD).push(4).op(OP_MSTORE);
    a.push(0).op(OP_SLOAD).push(36).op(OP_MSTORE);
    a.push(0).push(0).push(68).push(0).push(0);
    a.push_address(token).op(OP_GAS).op(OP_CALL).op(OP_POP);
    // poke the sink
    a.push(0).push(0).push(0).push(0).push(0);
    a.push(4).op(OP_CALLDATALOAD).op(OP_GAS).op(OP_CALL).op(OP_POP);
    a.op(OP_STOP);
    return a.assemble();
}

Address victim_eoa()
{
    return address_from_hex("0x53d8000000000000000000000000000000000d81");
}
Address adversary()
{
    return address_from_hex("0xabcdabcdabcdabcdabcdabcdabcdabcdabcdabcd");
}
Address coinbase()
{
    return addr_from_u16(0xc0c0);
}
Address guard_addr()
{
    return addr_from_u16(0x1001);
}
Address liq_pool_addr()
{
    return addr_from_u16(0x1002);
}
Address token_addr()
{
    return addr_from_u16(0x1003);
}
Address amm_addr()
{
    return addr_from_u16(0x1004);
}
Address depositer_addr()
{
    return addr_from_u16(0x1005);
}
Address vault_addr()
{
    return addr_from_u16(0x1006);
}
Address redeemer_addr()
{
    return addr_from_u16(0x1007);
}
Address ecdsa_vault_addr()
{
    return addr_from_u16(0x1008);
}
Address sink_addr()
{
    return addr_from_u16(0x1009);
}
Address poker_addr()
{
    return addr_from_u16(0x100a);
}
Address wrapper_addr()
{
    return addr_from_u16(0x100b);
}

namespace
{
StateFixture base_fixture()
{
    StateFixture f;
    f.state.block.number = 100;
    f.state.block.timestamp = 1'700'000'000;
    f.state.block.coinbase = coinbase();
    f.state.block.gas_limit = 30'000'000;
    f.state.block.chain_id = 1;
    f.state.block.base_gas_price = 0;

    Account victim;
    victim.balance = 10 * kEther;
    f.state.accounts[victim_eoa()] = victim;

    Account adv;
    adv.balance = 100 * kEther;
    f.state.accounts[adversary()] = adv;

    f.state.accounts[coinbase()] = Account{};
    return f;
}

Transaction base_tx(const Address& to, Bytes data, uint64_t gas_limit)
{
    Transaction tx;
    tx.sender = victim_eoa();
    tx.to = to;
    tx.value = 0;
    tx.data = std::move(data);
    tx.gas_limit = gas_limit;
    tx.gas_price = 10 * kGwei;
    tx.nonce = 0;
    return tx;
}

Bytes abi_call(const std::string& sig, const std::vector<Word>& args)
{
    Bytes data;
    uint32_t sel = selector(sig);
    data.push_back(static_cast<uint8_t>(sel >> 24));
    data.push_back(static_cast<uint8_t>(sel >> 16));
    data.push_back(static_cast<uint8_t>(sel >> 8));
    data.push_back(static_cast<uint8_t>(sel));
    for (const Word& w : args)
    {
        auto b = to_bytes32(w);
        data.insert(data.end(), b.begin(), b.end());
    }
    return data;
}

void add_amm(StateFixture& f, const Address& token, const Word& reserve_token,
             const Word& reserve_e)
{
    Account pool;
    pool.code = amm_pool_runtime();
    pool.balance = reserve_e;
    pool.storage[0] = word_from_address(token);
    pool.storage[1] = reserve_token;
    pool.storage[2] = reserve_e;
    f.state.accounts[amm_addr()] = pool;
    // the pool owns its token-side reserve
    f.state.accounts[token].storage[erc20_balance_slot(amm_addr())] = reserve_token;
    f.amm_pools.push_back(AmmPool{amm_addr(), token, reserve_token, reserve_e});
}
}  // namespace

ScenarioBundle guard_scenario()
{
    ScenarioBundle b;
    b.fixture = base_fixture();

    Account guard;
    guard.code = guard_runtime(victim_eoa(), liq_pool_addr());
    b.fixture.state.accounts[guard_addr()] = guard;

    Account pool;
    pool.code = liq_pool_runtime();
    pool.balance = 10 * kEther;
    pool.storage[0] = 3 * kEther;
    b.fixture.state.accounts[liq_pool_addr()] = pool;

    b.victim_tx = base_tx(guard_addr(), {}, 300'000);
    b.expected = ScenarioBundle::Expected::ApeSucceeds;
    b.notes = "caller-gated payout contract; the gate hard-codes the operator address";
    return b;
}

namespace
{
ScenarioBundle wrapped_guard_common(bool storage_target)
{
    ScenarioBundle b;
    b.fixture = base_fixture();

    Account guard;
    guard.code = guard_runtime(victim_eoa(), liq_pool_addr(), /*origin_auth=*/true);
    b.fixture.state.accounts[guard_addr()] = guard;

    Account pool;
    pool.code = liq_pool_runtime();
    pool.balance = 10 * kEther;
    pool.storage[0] = 3 * kEther;
    b.fixture.state.accounts[liq_pool_addr()] = pool;

    Account wrapper;
    if (storage_target)
    {
        wrapper.code = wrapper_storage_runtime();
        wrapper.storage[0] = word_from_address(guard_addr());
    }
    else
    {
        wrapper.code = wrapper_runtime(guard_addr());
    }
    b.fixture.state.accounts[wrapper_addr()] = wrapper;

    b.victim_tx = base_tx(wrapper_addr(), {}, 400'000);
    b.expected = ScenarioBundle::Expected::ApeSucceeds;
    b.notes = storage_target
                  ? "origin-gated payout behind a wrapper that loads the target from storage"
                  : "origin-gated payout behind a wrapper that hard-codes the target";
    return b;
}
}  // namespace

ScenarioBundle wrapped_guard_scenario()
{
    return wrapped_guard_common(false);
}

ScenarioBundle wrapped_guard_storage_scenario()
{
    return wrapped_guard_common(true);
}

ScenarioBundle massdeposit_scenario()
{
    ScenarioBundle b;
    b.fixture = base_fixture();

    Account token;
    token.code = erc20_runtime();
    token.storage[erc20_balance_slot(depositer_addr())] = 10'000;
    b.fixture.state.accounts[token_addr()] = token;
    b.fixture.token_layouts[token_addr()] = TokenLayout{};

    Account depositer;
    depositer.code = depositer_runtime();
    depositer.storage[0] = word_from_address(victim_eoa());  // owner handed to the vault
    b.fixture.state.accounts[depositer_addr()] = depositer;

    Account vault;
    vault.code = vault_runtime();
    vault.storage[0] = word_from_address(victim_eoa());
    vault.storage[1] = word_from_address(token_addr());
    b.fixture.state.accounts[vault_addr()] = vault;

    add_amm(b.fixture, token_addr(), 10'000, 50 * kEther);

    std::vector<Word> args{word_from_address(vault_addr()), word_from_address(token_addr()),
                           3, 3};
    const std::array<std::pair<uint16_t, uint64_t>, 3> deposits{
        {{0x2001, 100}, {0x2002, 200}, {0x2003, 300}}};
    for (auto [tag, amt] : deposits)
    {
        args.push_back(word_from_address(addr_from_u16(tag)));
        args.push_back(amt);
    }
    b.victim_tx = base_tx(depositer_addr(),
                          abi_call("massDeposit(address,address,address[],uint256[])", args),
                          2'000'000);
    b.expected = ScenarioBundle::Expected::ApeSucceeds;
    b.notes = "open massDeposit: anyone may supply the vault that collects the deposits";
    return b;
}

ScenarioBundle mint_swap_scenario()
{
    ScenarioBundle b;
    b.fixture = base_fixture();

    Account token;
    token.code = mintable_erc20_runtime();
    b.fixture.state.accounts[token_addr()] = token;
    b.fixture.token_layouts[token_addr()] = TokenLayout{};

    add_amm(b.fixture, token_addr(), Word{100'000'000'000'000ULL},
            Word{403} * kEther / 10);  // 40.3 E

    b.victim_tx = base_tx(
        token_addr(),
        abi_call("increaseAllowance(address,uint256)",
                 {word_from_address(victim_eoa()), Word{1'000'000'000'000'000ULL}}),
        600'000);
    b.expected = ScenarioBundle::Expected::NaiveSucceeds;
    b.notes = "increaseAllowance mints to the spender; one quadrillion units swapped on the pool";
    return b;
}

ScenarioBundle redeem_scenario()
{
    ScenarioBundle b;
    b.fixture = base_fixture();

    Account redeemer;
    redeemer.code = redeemer_runtime();
    redeemer.balance = 10 * kEther;
    redeemer.storage[0] = kEther;  // 1 E per redemption
    b.fixture.state.accounts[redeemer_addr()] = redeemer;

    b.victim_tx = base_tx(redeemer_addr(),
                          abi_call("redeemTo(address)", {word_from_address(victim_eoa())}),
                          200'000);
    b.expected = ScenarioBundle::Expected::NaiveSucceeds;
    b.notes = "unauthenticated native payout to a calldata address; no environment opcodes";
    return b;
}

ScenarioBundle ecdsa_vault_scenario()
{
    ScenarioBundle b;
    b.fixture = base_fixture();

    Account vault;
    vault.code = ecdsa_vault_runtime();
    vault.balance = 10 * kEther;
    b.fixture.state.accounts[ecdsa_vault_addr()] = vault;

    b.victim_tx = base_tx(
        ecdsa_vault_addr(),
        abi_call("withdraw(bytes32,uint8,bytes32,bytes32)",
                 {Word{0xdeadbeef}, Word{27}, Word{0x1111}, Word{0x2222}}),
        200'000);
    b.expected = ScenarioBundle::Expected::Abort;
    b.notes = "signature-gated withdrawal; recovery needs a precompile this machine lacks";
    return b;
}

ScenarioBundle tiny_sink_scenario()
{
    ScenarioBundle b;
    b.fixture = base_fixture();

    Account token;
    token.code = erc20_runtime();
    token.storage[erc20_balance_slot(poker_addr())] = 10'000;
    b.fixture.state.accounts[token_addr()] = token;
    b.fixture.token_layouts[token_addr()] = TokenLayout{};

    Account sink;
    sink.code = sink_runtime();
    b.fixture.state.accounts[sink_addr()] = sink;

    Account poker;
    poker.code = poker_runtime(token_addr());
    poker.storage[0] = 500;  // tokens moved per poke
    b.fixture.state.accounts[poker_addr()] = poker;

    add_amm(b.fixture, token_addr(), 10'000, 50 * kEther);

    b.victim_tx = base_tx(poker_addr(),
                          abi_call("poke(address)", {word_from_address(sink_addr())}), 600'000);
    b.expected = ScenarioBundle::Expected::ApeSucceeds;
    b.notes = "three-byte receiver contract collects tokens; sweep dwarfs the original code";
    return b;
}

std::vector<std::pair<std::string, ScenarioBundle>> all_scenarios()
{
    std::vector<std::pair<std::string, ScenarioBundle>> v;
    v.emplace_back("guard", guard_scenario());
    v.emplace_back("wrapped_guard", wrapped_guard_scenario());
    v.emplace_back("wrapped_guard_storage", wrapped_guard_storage_scenario());
    v.emplace_back("massdeposit", massdeposit_scenario());
    v.emplace_back("mint_swap", mint_swap_scenario());
    v.emplace_back("redeem", redeem_scenario());
    v.emplace_back("ecdsa_vault", ecdsa_vault_scenario());
    v.emplace_back("tiny_sink", tiny_sink_scenario());
    return v;
}

}  // namespace ape::canned
