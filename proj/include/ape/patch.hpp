// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include "ape/profit.hpp"
#include "ape/taint.hpp"

namespace ape
{
enum class PatchReason
{
    Tainted,
    Beneficiary,
    HardcodedCaller,
};

const char* patch_reason_name(PatchReason r);

struct PatchEntry
{
    Address victim{};
    PatchReason reason = PatchReason::Tainted;
    std::vector<size_t> caller_edges;  // indexes into dcfg.call_edges targeting this contract
};

enum class PatchAbort
{
    None,
    AssetContract,
    BiBranch,
    Misalignment,
};

const char* patch_abort_name(PatchAbort a);

struct PatchPlan
{
    /// Deploy order: callees before the callers that embed their addresses.
    std::vector<PatchEntry> replace_set;
    bool tx_to_redirect = false;
    PatchAbort abort = PatchAbort::None;
    std::string abort_detail;

    /// Victim addresses that arrive through transaction calldata; the
    /// imitation rewrites these in the data field instead of patching code.
    struct CalldataRewrite
    {
        Address victim{};
        uint64_t offset = 0;   // byte offset of the 20-byte address in tx data
        bool offset_known = false;  // false: fall back to scanning the data
    };
    std::vector<CalldataRewrite> calldata_rewrites;

    bool contains(const Address& a) const
    {
        for (const auto& e : replace_set)
            if (e.victim == a)
                return true;
        return false;
    }

    std::string to_json_text() const;
};

/// Builds the full replacement set: tainted contracts, beneficiary
/// contracts other than the sender, and the closure over callers whose
/// invocation of a replaced contract is hard-coded in bytecode or storage.
/// Aborts in-band when a member is an asset contract, a pinned branch needs
/// both directions, or the hard-coded dependencies form a cycle.
PatchPlan identify_patch_set(const TaintReport& taint, const ProfitReport& profit,
                             const DCFG& dcfg, const StateFixture& fixture,
                             const Transaction& tx_v);

}  // namespace ape
