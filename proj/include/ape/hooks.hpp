// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ape/common.hpp"
#include "ape/state.hpp"

namespace ape
{
enum class CallKind
{
    Transaction,  // outermost frame
    Call,
    CallCode,
    DelegateCall,
    StaticCall,
    Create,
};

const char* call_kind_name(CallKind k);

/// Fired once per executed opcode, before and after execution. Frames are
/// numbered in creation order (depth-first); step_index counts executed
/// instructions within one frame. The pair (frame_index, step_index) is the
/// alignment key used when two executions of the same code are compared.
struct StepEvent
{
    int depth = 0;
    uint64_t frame_index = 0;
    uint64_t step_index = 0;
    Address code_address{};
    Address self{};
    uint64_t pc = 0;
    uint8_t op = 0;
    uint64_t gas_left = 0;
    std::span<const Word> stack;  // bottom to top

    const Word& top(size_t i = 0) const { return stack[stack.size() - 1 - i]; }
};

/// Handed to pre-step subscribers. Stack writes are honored only when the
/// hook set was created with stack mutation enabled; otherwise they throw,
/// which keeps ordinary runs provably read-only.
class StepControl
{
public:
    virtual void set_stack(size_t index_from_top, const Word& value) = 0;
    virtual void abort_transaction() = 0;
    virtual ~StepControl() = default;
};

struct FrameEnterEvent
{
    int depth = 0;
    uint64_t frame_index = 0;
    uint64_t parent_frame_index = 0;
    CallKind kind = CallKind::Transaction;
    Address code_address{};
    Address self{};
    Address caller{};
    Word value = 0;
    BytesView input;
    bool is_static = false;
    // caller-memory window the input bytes were copied from (call family only)
    uint64_t arg_offset = 0;
    uint64_t arg_size = 0;
};

struct FrameExitEvent
{
    uint64_t frame_index = 0;
    int depth = 0;
    TxStatus status = TxStatus::Success;
    BytesView output;
    // caller-memory window the output is copied back to (call family only)
    uint64_t ret_offset = 0;
    uint64_t ret_size = 0;
    std::optional<Address> created;
};

class Hook
{
public:
    virtual void on_frame_enter(const FrameEnterEvent&) {}
    virtual void on_frame_exit(const FrameExitEvent&) {}
    virtual void on_step_pre(const StepEvent&, StepControl&) {}
    virtual void on_step_post(const StepEvent&, uint64_t /*gas_after*/) {}
    virtual ~Hook() = default;
};

struct HookSet
{
    std::vector<Hook*> hooks;
    bool allow_stack_mutation = false;

    void add(Hook* h) { hooks.push_back(h); }
};

}  // namespace ape
