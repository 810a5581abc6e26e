// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <map>
#include <set>
#include <vector>

#include "ape/gas.hpp"
#include "ape/hooks.hpp"
#include "ape/state.hpp"

namespace ape
{
struct BasicBlockRef
{
    Address contract{};   // account whose code the block belongs to
    uint64_t start_pc = 0;
    uint64_t end_pc = 0;  // last executed instruction of the block

    auto operator<=>(const BasicBlockRef&) const = default;
};

enum class ProvenanceTag
{
    CodeConstant,  // detail = pc of the PUSH
    StorageSlot,   // detail = slot
    Calldata,      // detail = byte offset in this frame's input
    Environment,   // detail = opcode
    Computed,
};

const char* provenance_name(ProvenanceTag t);

struct Provenance
{
    ProvenanceTag tag = ProvenanceTag::Computed;
    Word detail = 0;

    bool operator==(const Provenance&) const = default;

    static Provenance code_constant(uint64_t push_pc)
    {
        return {ProvenanceTag::CodeConstant, Word{push_pc}};
    }
    static Provenance storage_slot(const Word& slot) { return {ProvenanceTag::StorageSlot, slot}; }
    static Provenance calldata(const Word& offset) { return {ProvenanceTag::Calldata, offset}; }
    static Provenance environment(uint8_t op) { return {ProvenanceTag::Environment, Word{op}}; }
    static Provenance computed() { return {}; }
};

enum class EdgeKind
{
    Fallthrough,
    Jump,
    JumpiTaken,
    JumpiNotTaken,
};

const char* edge_kind_name(EdgeKind k);

struct Edge
{
    BasicBlockRef from;
    BasicBlockRef to;
    EdgeKind kind = EdgeKind::Fallthrough;

    auto operator<=>(const Edge&) const = default;
};

struct JumpiEvent
{
    uint64_t frame_index = 0;
    uint64_t step_index = 0;
    Address contract{};
    uint64_t pc = 0;
    bool condition = false;
    uint64_t destination = 0;
};

struct CallEdge
{
    BasicBlockRef caller_block;
    uint64_t caller_frame = 0;
    int caller_depth = 0;
    Address callee{};
    CallKind kind = CallKind::Call;
    Word value = 0;
    Provenance target_provenance;
    /// Frame the call produced; UINT64_MAX when the call never ran
    /// (insufficient balance, depth limit).
    uint64_t callee_frame = UINT64_MAX;
};

struct FrameInfo
{
    uint64_t index = 0;
    uint64_t parent = 0;
    int depth = 0;
    CallKind kind = CallKind::Transaction;
    Address code_address{};
    Address self{};
    Address caller{};
    uint64_t steps = 0;  // executed instructions
    TxStatus status = TxStatus::Success;
};

/// Everything the downstream passes need about one contract's dynamic
/// coverage.
struct ContractTrace
{
    std::set<std::pair<uint64_t, uint64_t>> blocks;       // (start_pc, end_pc)
    std::vector<uint64_t> block_sequence;                 // entered block starts, in order
    std::set<Word> sloaded_slots;
    std::set<uint64_t> jump_source_pushes;                // PUSH pcs observed feeding JUMP/JUMPI
    std::set<uint64_t> computed_jump_pcs;                 // JUMP/JUMPI whose target had no PUSH origin
    std::map<uint64_t, std::set<bool>> jumpi_conditions;  // JUMPI pc -> observed condition values
};

struct DCFG
{
    std::set<BasicBlockRef> nodes;
    std::set<Edge> edges;
    std::vector<CallEdge> call_edges;       // execution order
    std::vector<JumpiEvent> jumpi_record;   // execution order
    std::vector<FrameInfo> frames;          // indexed by frame_index
    std::map<Address, ContractTrace> contracts;

    const JumpiEvent* find_jumpi(uint64_t frame_index, uint64_t step_index) const;

    /// True when the frame's effects survived into the final state: it and
    /// every ancestor succeeded.
    bool frame_committed(uint64_t frame_index) const;

    /// JUMPI pcs of `contract` that took both branches during the execution.
    std::set<uint64_t> bi_branch_pcs(const Address& contract) const;

    std::string to_json_text() const;

private:
    mutable std::map<std::pair<uint64_t, uint64_t>, size_t> jumpi_index_;
};

struct VictimExecutionFailed : std::runtime_error
{
    explicit VictimExecutionFailed(const ExecutionResult& r)
        : std::runtime_error(std::string("victim transaction failed: ") + tx_error_name(r.error)),
          result(r)
    {}
    ExecutionResult result;
};

struct TraceResult
{
    DCFG dcfg;
    ExecutionResult exec;
    WorldState post_state;  // the state the victim execution produced
};

/// Runs the victim transaction on a scratch copy of `state` and collects
/// the dynamic control-flow graph. Throws VictimExecutionFailed if the
/// transaction does not succeed (nothing profitable to imitate).
TraceResult build_dcfg(const WorldState& state, const Transaction& tx_v, const GasTable& gas);

/// Hook that collects a DCFG while some other driver executes. Exposed so
/// the imitation validator can reuse the same block accounting.
class TraceHook : public Hook
{
public:
    TraceHook();
    ~TraceHook() override;

    void on_frame_enter(const FrameEnterEvent&) override;
    void on_frame_exit(const FrameExitEvent&) override;
    void on_step_pre(const StepEvent&, StepControl&) override;

    DCFG take();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace ape
