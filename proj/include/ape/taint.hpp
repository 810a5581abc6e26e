// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <set>

#include "ape/trace.hpp"

namespace ape
{
/// Taint source bits, for diagnostics. The default source set is ORIGIN,
/// CALLER, ADDRESS, CODESIZE, SELFBALANCE and PC: the opcodes whose values
/// can differ between the victim run and an imitation run.
enum TaintOrigin : uint8_t
{
    TAINT_ORIGIN = 1 << 0,
    TAINT_CALLER = 1 << 1,
    TAINT_ADDRESS = 1 << 2,
    TAINT_CODESIZE = 1 << 3,
    TAINT_SELFBALANCE = 1 << 4,
    TAINT_PC = 1 << 5,
};

struct TaintTag
{
    bool tainted = false;
    uint8_t origins = 0;

    TaintTag join(const TaintTag& o) const
    {
        return TaintTag{tainted || o.tainted, static_cast<uint8_t>(origins | o.origins)};
    }
    bool operator==(const TaintTag&) const = default;
};

/// Tag produced by executing `opcode` with no tainted inputs.
TaintTag introduce_taint(uint8_t opcode, const std::set<uint8_t>& sources);
TaintTag introduce_taint(uint8_t opcode);  // default source set

std::set<uint8_t> default_taint_sources();

struct TaintedBlock
{
    BasicBlockRef block;
    uint64_t jumpi_pc = 0;
    bool victim_condition = false;
    bool imitation_condition = false;
    uint8_t origins = 0;

    auto operator<=>(const TaintedBlock&) const = default;
};

/// One record per JUMPI executed during the replay; the soundness corpus
/// checks these flags against a perturbation oracle.
struct JumpiTaint
{
    uint64_t frame_index = 0;
    uint64_t step_index = 0;
    Address contract{};
    uint64_t pc = 0;
    bool condition = false;
    bool tainted = false;
    uint8_t origins = 0;
};

struct TaintReport
{
    std::set<TaintedBlock> tainted_blocks;
    std::set<Address> tainted_contracts;
    bool aligned_ok = true;
    std::string divergence;  // human-readable reason when aligned_ok is false

    /// Tainted pinned branches whose JUMPI took both directions in the
    /// victim run; such a branch cannot be pinned one way.
    std::set<std::pair<Address, uint64_t>> bi_branch;

    std::vector<JumpiTaint> jumpi_taint;

    std::string to_json_text() const;
};

struct TraceMisalignment : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct TaintOptions
{
    std::set<uint8_t> sources = default_taint_sources();
};

/// Executes the imitation candidate once on a scratch copy of `state`,
/// carrying shadow taint state. Every executed JUMPI is aligned with the
/// victim record by (frame index, step index): a tainted condition that
/// disagrees with the victim value is recorded as a tainted block and then
/// overridden so the run keeps following the victim path; an untainted
/// disagreement ends the replay with aligned_ok = false. Structural
/// divergence (different frames or instruction counts) throws
/// TraceMisalignment.
TaintReport taint_replay(const WorldState& state, const Transaction& tx_c, const DCFG& victim,
                         const GasTable& gas, const TaintOptions& opts = {});

}  // namespace ape
