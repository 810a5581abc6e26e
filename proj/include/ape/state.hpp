// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "ape/common.hpp"

namespace ape
{
struct Account
{
    Word balance = 0;  // native units
    uint64_t nonce = 0;
    Bytes code;
    std::map<Word, Word> storage;

    bool operator==(const Account&) const = default;
};

struct BlockContext
{
    uint64_t number = 1;
    uint64_t timestamp = 1;
    Address coinbase{};
    uint64_t gas_limit = 30'000'000;
    uint64_t chain_id = 1;
    Word base_gas_price = 0;

    bool operator==(const BlockContext&) const = default;
};

struct LogEntry
{
    Address emitter{};
    std::vector<Word> topics;
    Bytes data;

    bool operator==(const LogEntry&) const = default;
};

/// Full account set plus block context. Plain value type: copying it is the
/// snapshot mechanism, and operator== is the rollback check.
struct WorldState
{
    std::map<Address, Account> accounts;
    BlockContext block;

    bool operator==(const WorldState&) const = default;

    const Account* find(const Address& a) const
    {
        auto it = accounts.find(a);
        return it == accounts.end() ? nullptr : &it->second;
    }
    Account& get_or_create(const Address& a) { return accounts[a]; }

    Word balance_of(const Address& a) const
    {
        auto* acc = find(a);
        return acc ? acc->balance : Word{0};
    }
    uint64_t nonce_of(const Address& a) const
    {
        auto* acc = find(a);
        return acc ? acc->nonce : 0;
    }
};

struct Transaction
{
    Address sender{};
    std::optional<Address> to;  // absent = contract creation
    Word value = 0;
    Bytes data;
    uint64_t gas_limit = 1'000'000;
    Word gas_price = 0;
    uint64_t nonce = 0;

    bool operator==(const Transaction&) const = default;
};

enum class TxStatus
{
    Success,
    Revert,
    HaltError,
};

enum class TxError
{
    None,
    InvalidNonce,
    InsufficientBalance,
    IntrinsicGasTooHigh,
    OutOfGas,
    StackUnderflow,
    StackOverflow,
    InvalidJump,
    InvalidOpcode,
    StaticViolation,
    ReturndataOutOfBounds,
    CallDepthExceeded,
    AddressCollision,
    Create2Unsupported,
    HookAbort,
};

const char* tx_error_name(TxError e);

struct ExecutionResult
{
    TxStatus status = TxStatus::Success;
    TxError error = TxError::None;
    uint64_t gas_used = 0;
    Bytes return_data;
    std::vector<LogEntry> logs;

    bool ok() const { return status == TxStatus::Success; }
};

}  // namespace ape
