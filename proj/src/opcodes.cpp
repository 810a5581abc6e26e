// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#include "ape/opcodes.hpp"

#include <array>
#include <cstring>
#include <map>
#include <string>

namespace ape
{
namespace
{
struct OpTable
{
    std::array<OpInfo, 256> t{};

    constexpr void set(uint8_t op, const char* name, uint8_t pops, uint8_t pushes,
                       uint8_t imm = 0)
    {
        t[op] = OpInfo{name, pops, pushes, imm};
    }
};

OpTable build_table()
{
    OpTable tb;
    tb.set(OP_STOP, "STOP", 0, 0);
    tb.set(OP_ADD, "ADD", 2, 1);
    tb.set(OP_MUL, "MUL", 2, 1);
    tb.set(OP_SUB, "SUB", 2, 1);
    tb.set(OP_DIV, "DIV", 2, 1);
    tb.set(OP_SDIV, "SDIV", 2, 1);
    tb.set(OP_MOD, "MOD", 2, 1);
    tb.set(OP_SMOD, "SMOD", 2, 1);
    tb.set(OP_ADDMOD, "ADDMOD", 3, 1);
    tb.set(OP_MULMOD, "MULMOD", 3, 1);
    tb.set(OP_EXP, "EXP", 2, 1);
    tb.set(OP_SIGNEXTEND, "SIGNEXTEND", 2, 1);
    tb.set(OP_LT, "LT", 2, 1);
    tb.set(OP_GT, "GT", 2, 1);
    tb.set(OP_SLT, "SLT", 2, 1);
    tb.set(OP_SGT, "SGT", 2, 1);
    tb.set(OP_EQ, "EQ", 2, 1);
    tb.set(OP_ISZERO, "ISZERO", 1, 1);
    tb.set(OP_AND, "AND", 2, 1);
    tb.set(OP_OR, "OR", 2, 1);
    tb.set(OP_XOR, "XOR", 2, 1);
    tb.set(OP_NOT, "NOT", 1, 1);
    tb.set(OP_BYTE, "BYTE", 2, 1);
    tb.set(OP_SHL, "SHL", 2, 1);
    tb.set(OP_SHR, "SHR", 2, 1);
    tb.set(OP_SAR, "SAR", 2, 1);
    tb.set(OP_KECCAK256, "KECCAK256", 2, 1);
    tb.set(OP_ADDRESS, "ADDRESS", 0, 1);
    tb.set(OP_BALANCE, "BALANCE", 1, 1);
    tb.set(OP_ORIGIN, "ORIGIN", 0, 1);
    tb.set(OP_CALLER, "CALLER", 0, 1);
    tb.set(OP_CALLVALUE, "CALLVALUE", 0, 1);
    tb.set(OP_CALLDATALOAD, "CALLDATALOAD", 1, 1);
    tb.set(OP_CALLDATASIZE, "CALLDATASIZE", 0, 1);
    tb.set(OP_CALLDATACOPY, "CALLDATACOPY", 3, 0);
    tb.set(OP_CODESIZE, "CODESIZE", 0, 1);
    tb.set(OP_CODECOPY, "CODECOPY", 3, 0);
    tb.set(OP_GASPRICE, "GASPRICE", 0, 1);
    tb.set(OP_EXTCODESIZE, "EXTCODESIZE", 1, 1);
    tb.set(OP_EXTCODECOPY, "EXTCODECOPY", 4, 0);
    tb.set(OP_RETURNDATASIZE, "RETURNDATASIZE", 0, 1);
    tb.set(OP_RETURNDATACOPY, "RETURNDATACOPY", 3, 0);
    tb.set(OP_EXTCODEHASH, "EXTCODEHASH", 1, 1);
    tb.set(OP_BLOCKHASH, "BLOCKHASH", 1, 1);
    tb.set(OP_COINBASE, "COINBASE", 0, 1);
    tb.set(OP_TIMESTAMP, "TIMESTAMP", 0, 1);
    tb.set(OP_NUMBER, "NUMBER", 0, 1);
    tb.set(OP_DIFFICULTY, "DIFFICULTY", 0, 1);
    tb.set(OP_GASLIMIT, "GASLIMIT", 0, 1);
    tb.set(OP_CHAINID, "CHAINID", 0, 1);
    tb.set(OP_SELFBALANCE, "SELFBALANCE", 0, 1);
    tb.set(OP_POP, "POP", 1, 0);
    tb.set(OP_MLOAD, "MLOAD", 1, 1);
    tb.set(OP_MSTORE, "MSTORE", 2, 0);
    tb.set(OP_MSTORE8, "MSTORE8", 2, 0);
    tb.set(OP_SLOAD, "SLOAD", 1, 1);
    tb.set(OP_SSTORE, "SSTORE", 2, 0);
    tb.set(OP_JUMP, "JUMP", 1, 0);
    tb.set(OP_JUMPI, "JUMPI", 2, 0);
    tb.set(OP_PC, "PC", 0, 1);
    tb.set(OP_MSIZE, "MSIZE", 0, 1);
    tb.set(OP_GAS, "GAS", 0, 1);
    tb.set(OP_JUMPDEST, "JUMPDEST", 0, 0);

    static std::array<std::string, 32> push_names;
    static std::array<std::string, 16> dup_names;
    static std::array<std::string, 16> swap_names;
    for (unsigned i = 0; i < 32; ++i)
    {
        push_names[i] = "PUSH" + std::to_string(i + 1);
        tb.set(static_cast<uint8_t>(OP_PUSH1 + i), push_names[i].c_str(), 0, 1,
               static_cast<uint8_t>(i + 1));
    }
    for (unsigned i = 0; i < 16; ++i)
    {
        dup_names[i] = "DUP" + std::to_string(i + 1);
        swap_names[i] = "SWAP" + std::to_string(i + 1);
        // DUPn peeks n items, pushes one more; SWAPn touches n+1 items, net zero
        tb.set(static_cast<uint8_t>(OP_DUP1 + i), dup_names[i].c_str(),
               static_cast<uint8_t>(i + 1), static_cast<uint8_t>(i + 2));
        tb.set(static_cast<uint8_t>(OP_SWAP1 + i), swap_names[i].c_str(),
               static_cast<uint8_t>(i + 2), static_cast<uint8_t>(i + 2));
    }

    tb.set(OP_LOG0, "LOG0", 2, 0);
    tb.set(OP_LOG1, "LOG1", 3, 0);
    tb.set(OP_LOG2, "LOG2", 4, 0);
    tb.set(OP_LOG3, "LOG3", 5, 0);
    tb.set(OP_LOG4, "LOG4", 6, 0);
    tb.set(OP_CREATE, "CREATE", 3, 1);
    tb.set(OP_CALL, "CALL", 7, 1);
    tb.set(OP_CALLCODE, "CALLCODE", 7, 1);
    tb.set(OP_RETURN, "RETURN", 2, 0);
    tb.set(OP_DELEGATECALL, "DELEGATECALL", 6, 1);
    tb.set(OP_CREATE2, "CREATE2", 4, 1);
    tb.set(OP_STATICCALL, "STATICCALL", 6, 1);
    tb.set(OP_REVERT, "REVERT", 2, 0);
    tb.set(OP_INVALID, "INVALID", 0, 0);
    tb.set(OP_SELFDESTRUCT, "SELFDESTRUCT", 1, 0);
    return tb;
}

const OpTable& table()
{
    static const OpTable tb = build_table();
    return tb;
}
}  // namespace

const OpInfo& op_info(uint8_t op)
{
    return table().t[op];
}

std::optional<uint8_t> opcode_by_name(std::string_view name)
{
    static const std::map<std::string, uint8_t, std::less<>> by_name = [] {
        std::map<std::string, uint8_t, std::less<>> m;
        for (unsigned op = 0; op < 256; ++op)
        {
            if (table().t[op].name != nullptr)
                m.emplace(table().t[op].name, static_cast<uint8_t>(op));
        }
        // common alias
        m.emplace("SHA3", static_cast<uint8_t>(OP_KECCAK256));
        return m;
    }();
    auto it = by_name.find(name);
    if (it == by_name.end())
        return std::nullopt;
    return it->second;
}

}  // namespace ape
