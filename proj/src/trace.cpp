// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#include "ape/trace.hpp"

#include <cassert>

#include <json.hpp>

#include "ape/interpreter.hpp"
#include "ape/opcodes.hpp"

namespace ape
{
const char* provenance_name(ProvenanceTag t)
{
    switch (t)
    {
    case ProvenanceTag::CodeConstant: return "code-constant";
    case ProvenanceTag::StorageSlot: return "storage-slot";
    case ProvenanceTag::Calldata: return "calldata";
    case ProvenanceTag::Environment: return "environment";
    case ProvenanceTag::Computed: return "computed";
    }
    return "?";
}

const char* edge_kind_name(EdgeKind k)
{
    switch (k)
    {
    case EdgeKind::Fallthrough: return "fallthrough";
    case EdgeKind::Jump: return "jump";
    case EdgeKind::JumpiTaken: return "jumpi-taken";
    case EdgeKind::JumpiNotTaken: return "jumpi-not-taken";
    }
    return "?";
}

const JumpiEvent* DCFG::find_jumpi(uint64_t frame_index, uint64_t step_index) const
{
    if (jumpi_index_.empty() && !jumpi_record.empty())
    {
        for (size_t i = 0; i < jumpi_record.size(); ++i)
            jumpi_index_[{jumpi_record[i].frame_index, jumpi_record[i].step_index}] = i;
    }
    auto it = jumpi_index_.find({frame_index, step_index});
    return it == jumpi_index_.end() ? nullptr : &jumpi_record[it->second];
}

bool DCFG::frame_committed(uint64_t frame_index) const
{
    while (true)
    {
        if (frame_index >= frames.size())
            return false;
        const FrameInfo& f = frames[frame_index];
        if (f.status != TxStatus::Success)
            return false;
        if (frame_index == 0)
            return true;
        frame_index = f.parent;
    }
}

std::set<uint64_t> DCFG::bi_branch_pcs(const Address& contract) const
{
    std::set<uint64_t> out;
    auto it = contracts.find(contract);
    if (it == contracts.end())
        return out;
    for (const auto& [pc, conds] : it->second.jumpi_conditions)
        if (conds.size() > 1)
            out.insert(pc);
    return out;
}

std::string DCFG::to_json_text() const
{
    using nlohmann::json;
    json j;

    json nodes_j = json::array();
    for (const auto& n : nodes)
        nodes_j.push_back(json{{"contract", to_hex(n.contract)},
                               {"startPc", n.start_pc},
                               {"endPc", n.end_pc}});
    j["nodes"] = nodes_j;

    json edges_j = json::array();
    for (const auto& e : edges)
        edges_j.push_back(json{{"from", json{{"contract", to_hex(e.from.contract)},
                                             {"startPc", e.from.start_pc},
                                             {"endPc", e.from.end_pc}}},
                               {"to", json{{"contract", to_hex(e.to.contract)},
                                           {"startPc", e.to.start_pc},
                                           {"endPc", e.to.end_pc}}},
                               {"kind", edge_kind_name(e.kind)}});
    j["edges"] = edges_j;

    json jumpis = json::array();
    for (const auto& r : jumpi_record)
        jumpis.push_back(json{{"frameIndex", r.frame_index},
                              {"seqIndex", r.step_index},
                              {"contract", to_hex(r.contract)},
                              {"pc", r.pc},
                              {"conditionValue", r.condition},
                              {"destination", r.destination}});
    j["jumpiRecord"] = jumpis;

    json calls = json::array();
    for (const auto& c : call_edges)
        calls.push_back(json{{"callerContract", to_hex(c.caller_block.contract)},
                             {"callerBlockStart", c.caller_block.start_pc},
                             {"callerFrame", c.caller_frame},
                             {"callerDepth", c.caller_depth},
                             {"callee", to_hex(c.callee)},
                             {"callKind", call_kind_name(c.kind)},
                             {"valueWei", to_hex(c.value)},
                             {"targetProvenance",
                              json{{"tag", provenance_name(c.target_provenance.tag)},
                                   {"detail", to_hex(c.target_provenance.detail)}}}});
    j["callEdges"] = calls;

    json frames_j = json::array();
    for (const auto& fr : frames)
        frames_j.push_back(json{{"index", fr.index},
                                {"parent", fr.parent},
                                {"depth", fr.depth},
                                {"kind", call_kind_name(fr.kind)},
                                {"codeAddress", to_hex(fr.code_address)},
                                {"self", to_hex(fr.self)},
                                {"steps", fr.steps}});
    j["frames"] = frames_j;

    return j.dump(2) + "\n";
}

namespace
{
bool is_env_push0(uint8_t op)
{
    switch (op)
    {
    case OP_ADDRESS:
    case OP_ORIGIN:
    case OP_CALLER:
    case OP_CALLVALUE:
    case OP_CALLDATASIZE:
    case OP_CODESIZE:
    case OP_GASPRICE:
    case OP_RETURNDATASIZE:
    case OP_COINBASE:
    case OP_TIMESTAMP:
    case OP_NUMBER:
    case OP_DIFFICULTY:
    case OP_GASLIMIT:
    case OP_CHAINID:
    case OP_SELFBALANCE:
    case OP_PC:
    case OP_MSIZE:
    case OP_GAS:
        return true;
    default:
        return false;
    }
}

bool is_env_push1(uint8_t op)
{
    switch (op)
    {
    case OP_BALANCE:
    case OP_EXTCODESIZE:
    case OP_EXTCODEHASH:
    case OP_BLOCKHASH:
        return true;
    default:
        return false;
    }
}
}  // namespace

struct TraceHook::Impl
{
    DCFG dcfg;

    struct FrameState
    {
        uint64_t index = 0;
        Address code{};
        Address self{};
        int depth = 0;
        std::vector<Provenance> stack;
        std::map<uint64_t, Provenance> mem;  // 32-byte word index -> provenance

        bool block_open = false;
        uint64_t block_start = 0;
        uint64_t last_pc = 0;
        std::vector<size_t> open_call_edges;  // call_edges awaiting the block end

        bool have_pending_edge = false;
        BasicBlockRef pending_from;
        EdgeKind pending_kind = EdgeKind::Fallthrough;
    };

    std::vector<FrameState> stack;  // live frames
    std::optional<size_t> pending_call_edge;  // awaiting its child frame

    FrameState& top() { return stack.back(); }

    void open_block(FrameState& fs, uint64_t pc)
    {
        fs.block_open = true;
        fs.block_start = pc;
        fs.last_pc = pc;
        dcfg.contracts[fs.code].block_sequence.push_back(pc);
    }

    void close_block(FrameState& fs, uint64_t end_pc, EdgeKind next_kind, bool frame_ends)
    {
        BasicBlockRef ref{fs.code, fs.block_start, end_pc};
        dcfg.nodes.insert(ref);
        dcfg.contracts[fs.code].blocks.insert({ref.start_pc, ref.end_pc});
        for (size_t idx : fs.open_call_edges)
            dcfg.call_edges[idx].caller_block.end_pc = end_pc;
        fs.open_call_edges.clear();
        fs.block_open = false;
        // the edge into this block becomes complete only now
        if (fs.have_pending_edge)
            dcfg.edges.insert(Edge{fs.pending_from, ref, fs.pending_kind});
        fs.have_pending_edge = !frame_ends;
        fs.pending_from = ref;
        fs.pending_kind = next_kind;
    }

    Provenance mem_read(FrameState& fs, uint64_t offset)
    {
        auto get = [&](uint64_t idx) {
            auto it = fs.mem.find(idx);
            return it == fs.mem.end() ? Provenance::computed() : it->second;
        };
        if (offset % 32 == 0)
            return get(offset / 32);
        Provenance a = get(offset / 32), b = get(offset / 32 + 1);
        return a == b ? a : Provenance::computed();
    }

    void mem_write(FrameState& fs, uint64_t offset, const Provenance& p)
    {
        if (offset % 32 == 0)
        {
            fs.mem[offset / 32] = p;
        }
        else
        {
            fs.mem[offset / 32] = Provenance::computed();
            fs.mem[offset / 32 + 1] = Provenance::computed();
        }
    }

    // mirrors the interpreter's stack effect for one instruction
    void step_provenance(FrameState& fs, const StepEvent& ev)
    {
        uint8_t op = ev.op;
        auto& st = fs.stack;
        auto pop = [&] {
            Provenance p = st.back();
            st.pop_back();
            return p;
        };
        auto pop_n = [&](size_t n) { st.resize(st.size() - n); };
        auto push = [&](const Provenance& p) { st.push_back(p); };

        if (is_push(op))
        {
            push(Provenance::code_constant(ev.pc));
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
        if (is_env_push0(op))
        {
            push(Provenance::environment(op));
            return;
        }
        if (is_env_push1(op))
        {
            pop();
            push(Provenance::environment(op));
            return;
        }

        switch (op)
        {
        case OP_CALLDATALOAD: {
            Word offset = ev.top(0);
            pop();
            push(Provenance::calldata(offset));
            return;
        }
        case OP_SLOAD: {
            Word slot = ev.top(0);
            pop();
            push(Provenance::storage_slot(slot));
            return;
        }
        case OP_MLOAD: {
            uint64_t off = word_to_u64_clamped(ev.top(0));
            pop();
            push(mem_read(fs, off));
            return;
        }
        case OP_MSTORE: {
            uint64_t off = word_to_u64_clamped(ev.top(0));
            Provenance value = st[st.size() - 2];
            pop_n(2);
            mem_write(fs, off, value);
            return;
        }
        case OP_MSTORE8: {
            uint64_t off = word_to_u64_clamped(ev.top(0));
            pop_n(2);
            fs.mem[off / 32] = Provenance::computed();
            return;
        }
        case OP_ADD:
        case OP_OR:
        case OP_XOR: {
            // zero is the identity; combining with it keeps the other tag
            Provenance a = st[st.size() - 1], b = st[st.size() - 2];
            bool a_zero = ev.top(0) == 0, b_zero = ev.top(1) == 0;
            pop_n(2);
            if (a_zero && !b_zero)
                push(b);
            else if (b_zero && !a_zero)
                push(a);
            else
                push(Provenance::computed());
            return;
        }
        case OP_SUB: {
            Provenance a = st[st.size() - 1];
            bool b_zero = ev.top(1) == 0;
            pop_n(2);
            push(b_zero ? a : Provenance::computed());
            return;
        }
        default: {
            const OpInfo& info = op_info(op);
            pop_n(info.pops);
            for (unsigned i = 0; i < info.pushes; ++i)
                push(Provenance::computed());
            return;
        }
        }
    }
};

TraceHook::TraceHook() : impl_(std::make_unique<Impl>()) {}
TraceHook::~TraceHook() = default;

void TraceHook::on_frame_enter(const FrameEnterEvent& ev)
{
    if (impl_->pending_call_edge)
    {
        CallEdge& e = impl_->dcfg.call_edges[*impl_->pending_call_edge];
        e.callee_frame = ev.frame_index;
        if (ev.kind == CallKind::Create)
            e.callee = ev.self;  // creations learn their address here
        impl_->pending_call_edge.reset();
    }

    Impl::FrameState fs;
    fs.index = ev.frame_index;
    fs.code = ev.code_address;
    fs.self = ev.self;
    fs.depth = ev.depth;
    impl_->stack.push_back(std::move(fs));

    FrameInfo info;
    info.index = ev.frame_index;
    info.parent = ev.parent_frame_index;
    info.depth = ev.depth;
    info.kind = ev.kind;
    info.code_address = ev.code_address;
    info.self = ev.self;
    info.caller = ev.caller;
    assert(impl_->dcfg.frames.size() == ev.frame_index);
    impl_->dcfg.frames.push_back(info);
}

void TraceHook::on_frame_exit(const FrameExitEvent& ev)
{
    auto& fs = impl_->top();
    assert(fs.index == ev.frame_index);
    if (fs.block_open)
        impl_->close_block(fs, fs.last_pc, EdgeKind::Fallthrough, /*frame_ends=*/true);
    impl_->dcfg.frames[ev.frame_index].status = ev.status;
    impl_->stack.pop_back();
}

void TraceHook::on_step_pre(const StepEvent& ev, StepControl&)
{
    auto& impl = *impl_;
    auto& fs = impl.top();
    assert(fs.index == ev.frame_index);

    impl.pending_call_edge.reset();  // a call that never made a frame

    impl.dcfg.frames[ev.frame_index].steps = ev.step_index + 1;

    // block boundaries: a JUMPDEST in the middle of straight-line execution
    // starts a fresh node, so nodes never overlap
    if (!fs.block_open)
    {
        impl.open_block(fs, ev.pc);
    }
    else if (ev.op == OP_JUMPDEST)
    {
        impl.close_block(fs, fs.last_pc, EdgeKind::Fallthrough, false);
        impl.open_block(fs, ev.pc);
    }
    fs.last_pc = ev.pc;

    switch (ev.op)
    {
    case OP_JUMPI: {
        bool cond = ev.top(1) != 0;
        uint64_t dest = word_to_u64_clamped(ev.top(0));
        impl.dcfg.jumpi_record.push_back(
            JumpiEvent{ev.frame_index, ev.step_index, fs.code, ev.pc, cond, dest});
        impl.dcfg.contracts[fs.code].jumpi_conditions[ev.pc].insert(cond);
        if (fs.stack.back().tag == ProvenanceTag::CodeConstant)
            impl.dcfg.contracts[fs.code].jump_source_pushes.insert(
                word_to_u64_clamped(fs.stack.back().detail));
        else
            impl.dcfg.contracts[fs.code].computed_jump_pcs.insert(ev.pc);
        impl.close_block(fs, ev.pc, cond ? EdgeKind::JumpiTaken : EdgeKind::JumpiNotTaken, false);
        break;
    }
    case OP_JUMP: {
        if (fs.stack.back().tag == ProvenanceTag::CodeConstant)
            impl.dcfg.contracts[fs.code].jump_source_pushes.insert(
                word_to_u64_clamped(fs.stack.back().detail));
        else
            impl.dcfg.contracts[fs.code].computed_jump_pcs.insert(ev.pc);
        impl.close_block(fs, ev.pc, EdgeKind::Jump, false);
        break;
    }
    case OP_STOP:
    case OP_RETURN:
    case OP_REVERT:
    case OP_SELFDESTRUCT:
        impl.close_block(fs, ev.pc, EdgeKind::Fallthrough, /*frame_ends=*/true);
        break;
    case OP_SLOAD:
        impl.dcfg.contracts[fs.self].sloaded_slots.insert(ev.top(0));
        break;
    case OP_CALL:
    case OP_CALLCODE:
    case OP_DELEGATECALL:
    case OP_STATICCALL: {
        CallEdge edge;
        edge.caller_block = BasicBlockRef{fs.code, fs.block_start, ev.pc};
        edge.caller_frame = ev.frame_index;
        edge.caller_depth = ev.depth;
        auto target = address_from_word(ev.top(1));
        edge.callee = target.value_or(Address{});
        switch (ev.op)
        {
        case OP_CALL: edge.kind = CallKind::Call; break;
        case OP_CALLCODE: edge.kind = CallKind::CallCode; break;
        case OP_DELEGATECALL: edge.kind = CallKind::DelegateCall; break;
        default: edge.kind = CallKind::StaticCall; break;
        }
        edge.value = (ev.op == OP_CALL || ev.op == OP_CALLCODE) ? ev.top(2) : Word{0};
        edge.target_provenance = fs.stack[fs.stack.size() - 2];
        fs.open_call_edges.push_back(impl.dcfg.call_edges.size());
        impl.pending_call_edge = impl.dcfg.call_edges.size();
        impl.dcfg.call_edges.push_back(edge);
        break;
    }
    case OP_CREATE: {
        CallEdge edge;
        edge.caller_block = BasicBlockRef{fs.code, fs.block_start, ev.pc};
        edge.caller_frame = ev.frame_index;
        edge.caller_depth = ev.depth;
        edge.kind = CallKind::Create;
        edge.value = ev.top(0);
        edge.target_provenance = Provenance::computed();
        fs.open_call_edges.push_back(impl.dcfg.call_edges.size());
        impl.pending_call_edge = impl.dcfg.call_edges.size();
        impl.dcfg.call_edges.push_back(edge);
        break;
    }
    default:
        break;
    }

    impl.step_provenance(fs, ev);
}

DCFG TraceHook::take()
{
    return std::move(impl_->dcfg);
}

TraceResult build_dcfg(const WorldState& state, const Transaction& tx_v, const GasTable& gas)
{
    WorldState scratch = state;
    TraceHook tracer;
    HookSet hooks;
    hooks.add(&tracer);

    ExecutionResult r = execute_transaction(scratch, tx_v, gas, &hooks);
    if (r.status != TxStatus::Success)
        throw VictimExecutionFailed(r);
    return TraceResult{tracer.take(), std::move(r), std::move(scratch)};
}

}  // namespace ape
