// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#include "ape/patch.hpp"

#include <algorithm>

#include <json.hpp>

namespace ape
{
const char* patch_reason_name(PatchReason r)
{
    switch (r)
    {
    case PatchReason::Tainted: return "tainted";
    case PatchReason::Beneficiary: return "beneficiary";
    case PatchReason::HardcodedCaller: return "hardcoded-caller";
    }
    return "?";
}

const char* patch_abort_name(PatchAbort a)
{
    switch (a)
    {
    case PatchAbort::None: return "none";
    case PatchAbort::AssetContract: return "asset-contract";
    case PatchAbort::BiBranch: return "bi-branch";
    case PatchAbort::Misalignment: return "misalignment";
    }
    return "?";
}

PatchPlan identify_patch_set(const TaintReport& taint, const ProfitReport& profit,
                             const DCFG& dcfg, const StateFixture& fixture,
                             const Transaction& tx_v)
{
    PatchPlan plan;

    if (!taint.aligned_ok)
    {
        plan.abort = PatchAbort::Misalignment;
        plan.abort_detail = taint.divergence;
        return plan;
    }

    auto has_code = [&](const Address& a) {
        const Account* acc = fixture.state.find(a);
        return acc && !acc->code.empty();
    };

    std::map<Address, PatchReason> members;
    for (const Address& c : taint.tainted_contracts)
        members.emplace(c, PatchReason::Tainted);
    for (const Address& b : profit.beneficiaries)
    {
        if (b == tx_v.sender || !has_code(b))
            continue;
        members.emplace(b, PatchReason::Beneficiary);
    }

    if (!taint.bi_branch.empty())
    {
        plan.abort = PatchAbort::BiBranch;
        plan.abort_detail = "a pinned branch took both directions in the victim execution";
        return plan;
    }

    // closure over hard-coded invocations, applied until stable
    bool changed = true;
    while (changed)
    {
        changed = false;
        for (size_t i = 0; i < dcfg.call_edges.size(); ++i)
        {
            const CallEdge& e = dcfg.call_edges[i];
            if (!members.count(e.callee))
                continue;
            if (e.target_provenance.tag != ProvenanceTag::CodeConstant &&
                e.target_provenance.tag != ProvenanceTag::StorageSlot)
                continue;
            if (!members.count(e.caller_block.contract))
            {
                members.emplace(e.caller_block.contract, PatchReason::HardcodedCaller);
                changed = true;
            }
        }
    }

    for (const auto& [member, reason] : members)
    {
        (void)reason;
        if (profit.event_emitting_assets.count(member))
        {
            plan.abort = PatchAbort::AssetContract;
            plan.abort_detail = "replacement member " + to_hex(member) +
                                " emits standard asset events";
            return plan;
        }
    }

    // calldata-sourced invocations are fixed in the transaction data instead
    for (const CallEdge& e : dcfg.call_edges)
    {
        if (!members.count(e.callee))
            continue;
        if (e.target_provenance.tag != ProvenanceTag::Calldata)
            continue;
        PatchPlan::CalldataRewrite rw;
        rw.victim = e.callee;
        if (e.caller_depth == 0 && e.target_provenance.detail + 12 + 20 <= tx_v.data.size())
        {
            // the loaded word holds the address in its low 20 bytes
            rw.offset = static_cast<uint64_t>(e.target_provenance.detail) + 12;
            rw.offset_known = true;
        }
        bool dup = false;
        for (const auto& prev : plan.calldata_rewrites)
            if (prev.victim == rw.victim && prev.offset == rw.offset &&
                prev.offset_known == rw.offset_known)
                dup = true;
        if (!dup)
            plan.calldata_rewrites.push_back(rw);
    }

    // deploy order: callees before the callers that must embed their address
    std::map<Address, std::set<Address>> deps;  // caller -> callees it hard-codes
    std::map<Address, std::vector<size_t>> incoming;
    for (size_t i = 0; i < dcfg.call_edges.size(); ++i)
    {
        const CallEdge& e = dcfg.call_edges[i];
        if (!members.count(e.callee))
            continue;
        incoming[e.callee].push_back(i);
        if ((e.target_provenance.tag == ProvenanceTag::CodeConstant ||
             e.target_provenance.tag == ProvenanceTag::StorageSlot) &&
            members.count(e.caller_block.contract) && e.caller_block.contract != e.callee)
            deps[e.caller_block.contract].insert(e.callee);
    }

    std::vector<Address> order;
    std::set<Address> placed;
    while (placed.size() < members.size())
    {
        bool progressed = false;
        for (const auto& [member, reason] : members)
        {
            (void)reason;
            if (placed.count(member))
                continue;
            bool ready = true;
            for (const Address& dep : deps[member])
                if (!placed.count(dep))
                    ready = false;
            if (ready)
            {
                order.push_back(member);
                placed.insert(member);
                progressed = true;
            }
        }
        if (!progressed)
        {
            plan.abort = PatchAbort::Misalignment;
            plan.abort_detail = "mutual hard-coded references among replacement members";
            return plan;
        }
    }

    for (const Address& m : order)
    {
        PatchEntry entry;
        entry.victim = m;
        entry.reason = members.at(m);
        entry.caller_edges = incoming[m];
        plan.replace_set.push_back(std::move(entry));
    }

    plan.tx_to_redirect = tx_v.to && plan.contains(*tx_v.to);
    return plan;
}

std::string PatchPlan::to_json_text() const
{
    using nlohmann::json;
    json j;
    json set = json::array();
    for (const auto& e : replace_set)
        set.push_back(json{{"victimAddress", to_hex(e.victim)},
                           {"reason", patch_reason_name(e.reason)},
                           {"callerEdges", e.caller_edges}});
    j["replaceSet"] = set;
    j["txToRedirect"] = tx_to_redirect;
    if (abort != PatchAbort::None)
        j["abort"] = json{{"cause", patch_abort_name(abort)}, {"detail", abort_detail}};
    json rewrites = json::array();
    for (const auto& r : calldata_rewrites)
        rewrites.push_back(json{{"victim", to_hex(r.victim)},
                                {"offset", r.offset},
                                {"offsetKnown", r.offset_known}});
    j["calldataRewrites"] = rewrites;
    return j.dump(2) + "\n";
}

}  // namespace ape
