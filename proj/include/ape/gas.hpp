// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ape
{
/// Static per-opcode cost schedule plus the handful of dynamic-cost
/// parameters. Defaults approximate the Istanbul schedule without access
/// lists or refunds; every value can be overridden from a config file so
/// fixtures can pin gas numbers.
struct GasTable
{
    std::array<uint64_t, 256> op_cost{};

    uint64_t tx_base = 21'000;
    uint64_t tx_data_zero = 4;
    uint64_t tx_data_nonzero = 16;
    uint64_t memory_word = 3;
    uint64_t memory_quad_divisor = 512;
    uint64_t copy_word = 3;
    uint64_t keccak_word = 6;
    uint64_t exp_byte = 50;
    uint64_t log_topic = 375;
    uint64_t log_data_byte = 8;
    uint64_t call_value_transfer = 9'000;
    uint64_t call_stipend = 2'300;
    uint64_t call_new_account = 25'000;
    uint64_t sstore_set = 20'000;
    uint64_t sstore_reset = 5'000;
    uint64_t create = 32'000;
    uint64_t code_deposit_byte = 200;
    uint64_t selfdestruct = 5'000;
    uint64_t identity_base = 15;
    uint64_t identity_word = 3;

    static GasTable istanbul_defaults();

    /// Parse `name = value` lines (`#` comments). Opcode names set op_cost
    /// entries; parameter names set the matching field. Unknown names throw.
    static GasTable from_file(const std::string& path);
    void apply_line(const std::string& line, int lineno);
};

struct GasConfigError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

}  // namespace ape
