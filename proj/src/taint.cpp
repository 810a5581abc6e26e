// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#include "ape/taint.hpp"

#include <cassert>

#include <json.hpp>

#include "ape/interpreter.hpp"
#include "ape/opcodes.hpp"

namespace ape
{
std::set<uint8_t> default_taint_sources()
{
    return {OP_ORIGIN, OP_CALLER, OP_ADDRESS, OP_CODESIZE, OP_SELFBALANCE, OP_PC};
}

namespace
{
uint8_t origin_bit(uint8_t op)
{
    switch (op)
    {
    case OP_ORIGIN: return TAINT_ORIGIN;
    case OP_CALLER: return TAINT_CALLER;
    case OP_ADDRESS: return TAINT_ADDRESS;
    case OP_CODESIZE: return TAINT_CODESIZE;
    case OP_SELFBALANCE: return TAINT_SELFBALANCE;
    case OP_PC: return TAINT_PC;
    default: return 0;
    }
}

/// Sparse byte-interval map; only tainted spans are stored.
class ByteRangeTags
{
public:
    void clear() { spans_.clear(); }

    void erase(uint64_t start, uint64_t end)
    {
        if (start >= end)
            return;
        auto it = spans_.lower_bound(start);
        if (it != spans_.begin())
        {
            auto prev = std::prev(it);
            if (prev->second.first > start)
            {
                auto [pend, ptag] = prev->second;
                prev->second.first = start;
                if (pend > end)
                    spans_[end] = {pend, ptag};
            }
        }
        it = spans_.lower_bound(start);
        while (it != spans_.end() && it->first < end)
        {
            auto [send, stag] = it->second;
            it = spans_.erase(it);
            if (send > end)
            {
                spans_[end] = {send, stag};
                break;
            }
        }
    }

    void set(uint64_t start, uint64_t end, const TaintTag& t)
    {
        if (start >= end)
            return;
        erase(start, end);
        if (t.tainted)
            spans_[start] = {end, t};
    }

    TaintTag join(uint64_t start, uint64_t end) const
    {
        TaintTag out;
        if (start >= end)
            return out;
        auto it = spans_.lower_bound(start);
        if (it != spans_.begin())
        {
            auto prev = std::prev(it);
            if (prev->second.first > start)
                out = out.join(prev->second.second);
        }
        for (; it != spans_.end() && it->first < end; ++it)
            out = out.join(it->second.second);
        return out;
    }

    bool any() const { return !spans_.empty(); }

private:
    std::map<uint64_t, std::pair<uint64_t, TaintTag>> spans_;  // start -> (end, tag)
};

constexpr uint64_t kOffsetCap = 1ull << 32;

uint64_t clamp_off(const Word& w)
{
    return w > kOffsetCap ? kOffsetCap : static_cast<uint64_t>(w);
}
}  // namespace

TaintTag introduce_taint(uint8_t opcode, const std::set<uint8_t>& sources)
{
    if (sources.count(opcode))
        return TaintTag{true, origin_bit(opcode)};
    return TaintTag{};
}

TaintTag introduce_taint(uint8_t opcode)
{
    static const std::set<uint8_t> defaults = default_taint_sources();
    return introduce_taint(opcode, defaults);
}

std::string TaintReport::to_json_text() const
{
    using nlohmann::json;
    json j;
    json blocks = json::array();
    for (const auto& b : tainted_blocks)
        blocks.push_back(json{{"contract", to_hex(b.block.contract)},
                              {"blockStart", b.block.start_pc},
                              {"blockEnd", b.block.end_pc},
                              {"jumpiPc", b.jumpi_pc},
                              {"victimCondition", b.victim_condition},
                              {"imitationCondition", b.imitation_condition},
                              {"origins", b.origins}});
    j["taintedBlocks"] = blocks;
    json contracts = json::array();
    for (const auto& c : tainted_contracts)
        contracts.push_back(to_hex(c));
    j["taintedContracts"] = contracts;
    j["alignedOk"] = aligned_ok;
    if (!aligned_ok)
        j["divergence"] = divergence;
    json bi = json::array();
    for (const auto& [c, pc] : bi_branch)
        bi.push_back(json{{"contract", to_hex(c)}, {"pc", pc}});
    j["biBranch"] = bi;
    j["jumpiCount"] = jumpi_taint.size();
    return j.dump(2) + "\n";
}

namespace
{
class TaintHook final : public Hook
{
public:
    TaintHook(const DCFG& victim, const TaintOptions& opts) : victim_(victim), opts_(opts) {}

    TaintReport report;
    bool misaligned = false;
    std::string misalign_reason;

    void on_frame_enter(const FrameEnterEvent& ev) override
    {
        // lockstep check against the victim's frame table
        if (ev.frame_index >= victim_.frames.size())
        {
            diverge_structural("imitation opened more frames than the victim at frame " +
                               std::to_string(ev.frame_index));
        }
        else
        {
            const FrameInfo& vf = victim_.frames[ev.frame_index];
            if (vf.code_address != ev.code_address || vf.kind != ev.kind ||
                vf.depth != ev.depth)
                diverge_structural("frame " + std::to_string(ev.frame_index) +
                                   " does not match the victim trace");
        }

        ++frames_seen_;

        TFrame f;
        f.index = ev.frame_index;
        f.code = ev.code_address;
        f.self = ev.self;
        if (!frames_.empty())
            f.calldata = std::move(pending_child_input_);
        pending_child_input_.clear();
        frames_.push_back(std::move(f));
    }

    void on_frame_exit(const FrameExitEvent& ev) override
    {
        assert(!frames_.empty());
        TFrame child = std::move(frames_.back());
        frames_.pop_back();
        if (frames_.empty())
            return;

        TFrame& parent = frames_.back();
        // identity copies its input; everything else returns what RETURN /
        // REVERT captured from callee memory
        static const Address identity = [] {
            Address a{};
            a.bytes[19] = 0x04;
            return a;
        }();
        ByteRangeTags out_tags =
            child.code == identity ? std::move(child.calldata) : std::move(child.output);

        if (ev.created)
        {
            parent.returndata.clear();
        }
        else
        {
            parent.returndata = out_tags;
            uint64_t n = std::min<uint64_t>(parent.pending_ret_len, ev.output.size());
            uint64_t base = parent.pending_ret_off;
            for (uint64_t w = base / 32 * 32; w < base + n; w += 32)
            {
                uint64_t lo = std::max(w, base);
                uint64_t hi = std::min(w + 32, base + n);
                TaintTag t = out_tags.join(lo - base, hi - base);
                word_store(parent, w / 32, word_load(parent, w / 32).join(t));
            }
        }
        parent.pending_ret_off = 0;
        parent.pending_ret_len = 0;
    }

    void on_step_pre(const StepEvent& ev, StepControl& ctl) override
    {
        if (misaligned)
        {
            ctl.abort_transaction();
            return;
        }
        pending_child_input_.clear();  // a call that never made a frame

        TFrame& f = frames_.back();
        assert(f.index == ev.frame_index);
        steps_seen_[ev.frame_index] = ev.step_index + 1;

        if (ev.frame_index < victim_.frames.size() &&
            ev.step_index >= victim_.frames[ev.frame_index].steps)
        {
            diverge_structural("frame " + std::to_string(ev.frame_index) +
                               " runs past the victim's instruction count");
            ctl.abort_transaction();
            return;
        }

        if (ev.op == OP_JUMPI)
            check_jumpi(ev, ctl, f);

        propagate(f, ev);
    }

    void finish(const ExecutionResult& r)
    {
        if (misaligned)
            throw TraceMisalignment(misalign_reason);
        if (!report.aligned_ok)
            return;

        // the whole run must have consumed the victim trace exactly
        if (frames_seen_ != victim_.frames.size())
            throw TraceMisalignment("imitation opened " + std::to_string(frames_seen_) +
                                    " frames, victim opened " +
                                    std::to_string(victim_.frames.size()));
        for (const FrameInfo& vf : victim_.frames)
        {
            uint64_t got = 0;
            if (auto it = steps_seen_.find(vf.index); it != steps_seen_.end())
                got = it->second;
            if (got != vf.steps)
                throw TraceMisalignment("frame " + std::to_string(vf.index) + " executed " +
                                        std::to_string(got) + " instructions, victim executed " +
                                        std::to_string(vf.steps));
        }
        (void)r;

        for (const auto& b : report.tainted_blocks)
        {
            report.tainted_contracts.insert(b.block.contract);
            if (victim_.bi_branch_pcs(b.block.contract).count(b.jumpi_pc))
                report.bi_branch.insert({b.block.contract, b.jumpi_pc});
        }
    }

private:
    size_t frames_seen_ = 0;
    std::map<uint64_t, uint64_t> steps_seen_;

    struct TFrame
    {
        uint64_t index = 0;
        Address code{};
        Address self{};
        std::vector<TaintTag> stack;
        std::map<uint64_t, TaintTag> mem;  // 32-byte word index -> tag
        ByteRangeTags calldata;
        ByteRangeTags returndata;
        ByteRangeTags output;  // captured at RETURN / REVERT
        uint64_t pending_ret_off = 0;
        uint64_t pending_ret_len = 0;
    };

    void diverge_structural(const std::string& why)
    {
        misaligned = true;
        misalign_reason = why;
    }

    TaintTag word_load(TFrame& f, uint64_t word_index)
    {
        auto it = f.mem.find(word_index);
        return it == f.mem.end() ? TaintTag{} : it->second;
    }
    void word_store(TFrame& f, uint64_t word_index, const TaintTag& t)
    {
        if (t.tainted)
            f.mem[word_index] = t;
        else
            f.mem.erase(word_index);
    }

    TaintTag mem_join(TFrame& f, uint64_t off, uint64_t len)
    {
        TaintTag out;
        if (len == 0)
            return out;
        for (uint64_t w = off / 32; w <= (off + len - 1) / 32; ++w)
            out = out.join(word_load(f, w));
        return out;
    }

    // write one tag across [off, off+len); partially covered edge words join
    void mem_blast(TFrame& f, uint64_t off, uint64_t len, const TaintTag& t)
    {
        if (len == 0)
            return;
        uint64_t end = off + len;
        for (uint64_t w = off / 32; w * 32 < end; ++w)
        {
            uint64_t lo = std::max(off, w * 32), hi = std::min(end, w * 32 + 32);
            bool full = (lo == w * 32 && hi == w * 32 + 32);
            word_store(f, w, full ? t : word_load(f, w).join(t));
        }
    }

    void check_jumpi(const StepEvent& ev, StepControl& ctl, TFrame& f)
    {
        bool cond = ev.top(1) != 0;
        TaintTag tag = f.stack[f.stack.size() - 2];
        report.jumpi_taint.push_back(JumpiTaint{ev.frame_index, ev.step_index, f.code, ev.pc,
                                                cond, tag.tainted, tag.origins});

        const JumpiEvent* v = victim_.find_jumpi(ev.frame_index, ev.step_index);
        if (v == nullptr || v->pc != ev.pc)
        {
            diverge_structural("JUMPI at frame " + std::to_string(ev.frame_index) + " step " +
                               std::to_string(ev.step_index) +
                               " has no matching victim record");
            ctl.abort_transaction();
            return;
        }
        if (cond == v->condition)
            return;

        if (tag.tainted)
        {
            // pin the branch to the victim direction and keep going
            TaintedBlock tb;
            tb.jumpi_pc = ev.pc;
            tb.victim_condition = v->condition;
            tb.imitation_condition = cond;
            tb.origins = tag.origins;
            tb.block = find_victim_block(f.code, ev.pc);
            report.tainted_blocks.insert(tb);
            ctl.set_stack(1, v->condition ? 1 : 0);
        }
        else
        {
            report.aligned_ok = false;
            report.divergence = "untainted JUMPI condition differs at pc " +
                                std::to_string(ev.pc) + " (frame " +
                                std::to_string(ev.frame_index) + ")";
            ctl.abort_transaction();
        }
    }

    BasicBlockRef find_victim_block(const Address& contract, uint64_t jumpi_pc) const
    {
        auto it = victim_.contracts.find(contract);
        if (it != victim_.contracts.end())
        {
            for (const auto& [start, end] : it->second.blocks)
                if (end == jumpi_pc)
                    return BasicBlockRef{contract, start, end};
        }
        return BasicBlockRef{contract, jumpi_pc, jumpi_pc};
    }

    void propagate(TFrame& f, const StepEvent& ev)
    {
        uint8_t op = ev.op;
        auto& st = f.stack;
        auto pop = [&] {
            TaintTag t = st.back();
            st.pop_back();
            return t;
        };
        auto pop_n = [&](size_t n) { st.resize(st.size() - n); };
        auto push = [&](const TaintTag& t) { st.push_back(t); };

        if (opts_.sources.count(op))
        {
            pop_n(op_info(op).pops);  // BALANCE-style sources would pop one
            push(TaintTag{true, origin_bit(op)});
            return;
        }
        if (is_push(op))
        {
            push(TaintTag{});
            return;
        }
        if (op >= OP_DUP1 && op <= OP_DUP16)
        {
            push(st[st.size() - 1 - (op - OP_DUP1)]);
            return;
        }
        if (op >= OP_SWAP1 && op <= OP_SWAP16)
        {
            std::swap(st.back(), st[st.size() - 2 - (op - OP_SWAP1)]);
            return;
        }

        switch (op)
        {
        case OP_KECCAK256: {
            uint64_t off = clamp_off(ev.top(0)), len = clamp_off(ev.top(1));
            TaintTag t = pop().join(pop()).join(mem_join(f, off, len));
            push(t);
            return;
        }
        case OP_CALLDATALOAD: {
            uint64_t off = clamp_off(ev.top(0));
            TaintTag t = pop().join(f.calldata.join(off, off + 32));
            push(t);
            return;
        }
        case OP_CALLDATACOPY: {
            uint64_t dst = clamp_off(ev.top(0)), src = clamp_off(ev.top(1)),
                     len = clamp_off(ev.top(2));
            pop_n(3);
            for (uint64_t i = 0; i < len; i += 32)
            {
                uint64_t chunk = std::min<uint64_t>(32, len - i);
                mem_blast(f, dst + i, chunk, f.calldata.join(src + i, src + i + chunk));
            }
            return;
        }
        case OP_RETURNDATACOPY: {
            uint64_t dst = clamp_off(ev.top(0)), src = clamp_off(ev.top(1)),
                     len = clamp_off(ev.top(2));
            pop_n(3);
            for (uint64_t i = 0; i < len; i += 32)
            {
                uint64_t chunk = std::min<uint64_t>(32, len - i);
                mem_blast(f, dst + i, chunk, f.returndata.join(src + i, src + i + chunk));
            }
            return;
        }
        case OP_CODECOPY:
        case OP_EXTCODECOPY: {
            unsigned pops = op_info(op).pops;
            uint64_t dst = clamp_off(ev.top(op == OP_EXTCODECOPY ? 1 : 0));
            uint64_t len = clamp_off(ev.top(op == OP_EXTCODECOPY ? 3 : 2));
            pop_n(pops);
            mem_blast(f, dst, len, TaintTag{});  // code bytes are identical across runs
            return;
        }
        case OP_MLOAD: {
            uint64_t off = clamp_off(ev.top(0));
            TaintTag t = pop().join(mem_join(f, off, 32));
            push(t);
            return;
        }
        case OP_MSTORE: {
            uint64_t off = clamp_off(ev.top(0));
            TaintTag addr_tag = pop();
            TaintTag value = pop().join(addr_tag);
            mem_blast(f, off, 32, value);
            return;
        }
        case OP_MSTORE8: {
            uint64_t off = clamp_off(ev.top(0));
            TaintTag addr_tag = pop();
            TaintTag value = pop().join(addr_tag);
            word_store(f, off / 32, word_load(f, off / 32).join(value));
            return;
        }
        case OP_SLOAD: {
            Word slot = ev.top(0);
            TaintTag key = pop();
            TaintTag stored;
            auto it = storage_.find({f.self, slot});
            if (it != storage_.end())
                stored = it->second;
            push(stored.join(key));  // a value read through a tainted slot is tainted
            return;
        }
        case OP_SSTORE: {
            Word slot = ev.top(0);
            TaintTag key = pop();
            TaintTag value = pop().join(key);
            if (value.tainted)
                storage_[{f.self, slot}] = value;
            else
                storage_.erase({f.self, slot});
            return;
        }
        case OP_CALL:
        case OP_CALLCODE:
        case OP_DELEGATECALL:
        case OP_STATICCALL: {
            bool has_value = (op == OP_CALL || op == OP_CALLCODE);
            unsigned arg_at = has_value ? 3 : 2;
            uint64_t arg_off = clamp_off(ev.top(arg_at));
            uint64_t arg_len = clamp_off(ev.top(arg_at + 1));
            f.pending_ret_off = clamp_off(ev.top(arg_at + 2));
            f.pending_ret_len = clamp_off(ev.top(arg_at + 3));

            pending_child_input_.clear();
            for (uint64_t i = 0; i < arg_len; i += 32)
            {
                uint64_t chunk = std::min<uint64_t>(32, arg_len - i);
                TaintTag t = mem_join(f, arg_off + i, chunk);
                pending_child_input_.set(i, i + chunk, t);
            }
            pop_n(op_info(op).pops);
            push(TaintTag{});  // the status word is not a source
            return;
        }
        case OP_CREATE: {
            uint64_t off = clamp_off(ev.top(1)), len = clamp_off(ev.top(2));
            pending_child_input_.clear();
            for (uint64_t i = 0; i < len; i += 32)
            {
                uint64_t chunk = std::min<uint64_t>(32, len - i);
                pending_child_input_.set(i, i + chunk, mem_join(f, off + i, chunk));
            }
            pop_n(3);
            push(TaintTag{});
            return;
        }
        case OP_RETURN:
        case OP_REVERT: {
            uint64_t off = clamp_off(ev.top(0)), len = clamp_off(ev.top(1));
            f.output.clear();
            for (uint64_t i = 0; i < len; i += 32)
            {
                uint64_t chunk = std::min<uint64_t>(32, len - i);
                f.output.set(i, i + chunk, mem_join(f, off + i, chunk));
            }
            pop_n(2);
            return;
        }
        default: {
            // generic rule: join the consumed tags into every produced word
            const OpInfo& info = op_info(op);
            TaintTag t;
            for (unsigned i = 0; i < info.pops; ++i)
                t = t.join(pop());
            for (unsigned i = 0; i < info.pushes; ++i)
                push(t);
            return;
        }
        }
    }

    const DCFG& victim_;
    const TaintOptions& opts_;
    std::vector<TFrame> frames_;
    std::map<std::pair<Address, Word>, TaintTag> storage_;
    ByteRangeTags pending_child_input_;
};
}  // namespace

TaintReport taint_replay(const WorldState& state, const Transaction& tx_c, const DCFG& victim,
                         const GasTable& gas, const TaintOptions& opts)
{
    WorldState scratch = state;
    TaintHook hook(victim, opts);
    HookSet hooks;
    hooks.allow_stack_mutation = true;
    hooks.add(&hook);

    ExecutionResult r = execute_transaction(scratch, tx_c, gas, &hooks);
    hook.finish(r);
    return std::move(hook.report);
}

}  // namespace ape
