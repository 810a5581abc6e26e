// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#include "ape/gas.hpp"

#include <fstream>
#include <functional>
#include <map>

#include "ape/opcodes.hpp"

namespace ape
{
GasTable GasTable::istanbul_defaults()
{
    GasTable g;
    auto set = [&](uint8_t op, uint64_t cost) { g.op_cost[op] = cost; };

    constexpr uint64_t zero = 0, base = 2, verylow = 3, low = 5, mid = 8, high = 10, ext = 700;

    set(OP_STOP, zero);
    for (uint8_t op : {OP_ADD, OP_SUB, OP_LT, OP_GT, OP_SLT, OP_SGT, OP_EQ, OP_ISZERO, OP_AND,
                       OP_OR, OP_XOR, OP_NOT, OP_BYTE, OP_SHL, OP_SHR, OP_SAR, OP_CALLDATALOAD,
                       OP_MLOAD, OP_MSTORE, OP_MSTORE8})
        set(op, verylow);
    for (uint8_t op : {OP_MUL, OP_DIV, OP_SDIV, OP_MOD, OP_SMOD, OP_SIGNEXTEND})
        set(op, low);
    for (uint8_t op : {OP_ADDMOD, OP_MULMOD, OP_JUMP})
        set(op, mid);
    set(OP_JUMPI, high);
    set(OP_EXP, high);
    set(OP_KECCAK256, 30);
    for (uint8_t op : {OP_ADDRESS, OP_ORIGIN, OP_CALLER, OP_CALLVALUE, OP_CALLDATASIZE,
                       OP_CODESIZE, OP_GASPRICE, OP_COINBASE, OP_TIMESTAMP, OP_NUMBER,
                       OP_DIFFICULTY, OP_GASLIMIT, OP_RETURNDATASIZE, OP_POP, OP_PC, OP_MSIZE,
                       OP_GAS, OP_CHAINID})
        set(op, base);
    set(OP_SELFBALANCE, low);
    set(OP_BALANCE, ext);
    for (uint8_t op : {OP_CALLDATACOPY, OP_CODECOPY, OP_RETURNDATACOPY})
        set(op, verylow);
    set(OP_EXTCODESIZE, ext);
    set(OP_EXTCODECOPY, ext);
    set(OP_EXTCODEHASH, ext);
    set(OP_BLOCKHASH, 20);
    set(OP_SLOAD, 800);
    set(OP_SSTORE, 0);  // fully dynamic, see sstore_set / sstore_reset
    set(OP_JUMPDEST, 1);
    for (unsigned i = 0; i < 32; ++i)
        set(static_cast<uint8_t>(OP_PUSH1 + i), verylow);
    for (unsigned i = 0; i < 16; ++i)
    {
        set(static_cast<uint8_t>(OP_DUP1 + i), verylow);
        set(static_cast<uint8_t>(OP_SWAP1 + i), verylow);
    }
    for (unsigned i = 0; i <= 4; ++i)
        set(static_cast<uint8_t>(OP_LOG0 + i), 375);
    set(OP_CREATE, g.create);
    set(OP_CALL, ext);
    set(OP_CALLCODE, ext);
    set(OP_DELEGATECALL, ext);
    set(OP_STATICCALL, ext);
    set(OP_RETURN, zero);
    set(OP_REVERT, zero);
    set(OP_SELFDESTRUCT, g.selfdestruct);
    return g;
}

void GasTable::apply_line(const std::string& raw, int lineno)
{
    std::string line = raw;
    if (auto pos = line.find('#'); pos != std::string::npos)
        line.erase(pos);
    auto trim = [](std::string& s) {
        s.erase(0, s.find_first_not_of(" \t\r\n"));
        auto end = s.find_last_not_of(" \t\r\n");
        s.erase(end == std::string::npos ? 0 : end + 1);
    };
    trim(line);
    if (line.empty())
        return;

    auto eq = line.find('=');
    if (eq == std::string::npos)
        throw GasConfigError("gas table line " + std::to_string(lineno) + ": missing '='");
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    trim(key);
    trim(val);

    uint64_t v = 0;
    try
    {
        v = std::stoull(val);
    }
    catch (const std::exception&)
    {
        throw GasConfigError("gas table line " + std::to_string(lineno) + ": bad value '" + val +
                             "'");
    }

    static const std::map<std::string, uint64_t GasTable::*> params = {
        {"tx_base", &GasTable::tx_base},
        {"tx_data_zero", &GasTable::tx_data_zero},
        {"tx_data_nonzero", &GasTable::tx_data_nonzero},
        {"memory_word", &GasTable::memory_word},
        {"memory_quad_divisor", &GasTable::memory_quad_divisor},
        {"copy_word", &GasTable::copy_word},
        {"keccak_word", &GasTable::keccak_word},
        {"exp_byte", &GasTable::exp_byte},
        {"log_topic", &GasTable::log_topic},
        {"log_data_byte", &GasTable::log_data_byte},
        {"call_value_transfer", &GasTable::call_value_transfer},
        {"call_stipend", &GasTable::call_stipend},
        {"call_new_account", &GasTable::call_new_account},
        {"sstore_set", &GasTable::sstore_set},
        {"sstore_reset", &GasTable::sstore_reset},
        {"create", &GasTable::create},
        {"code_deposit_byte", &GasTable::code_deposit_byte},
        {"selfdestruct", &GasTable::selfdestruct},
        {"identity_base", &GasTable::identity_base},
        {"identity_word", &GasTable::identity_word},
    };

    if (auto it = params.find(key); it != params.end())
    {
        this->*(it->second) = v;
        return;
    }
    if (auto op = opcode_by_name(key))
    {
        op_cost[*op] = v;
        return;
    }
    throw GasConfigError("gas table line " + std::to_string(lineno) + ": unknown key '" + key +
                         "'");
}

GasTable GasTable::from_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw GasConfigError("cannot open gas table: " + path);
    GasTable g = istanbul_defaults();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
        g.apply_line(line, ++lineno);
    return g;
}

}  // namespace ape
