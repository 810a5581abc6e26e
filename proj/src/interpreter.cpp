// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#include "ape/interpreter.hpp"

#include <algorithm>
#include <cassert>
#include <set>

#include "ape/opcodes.hpp"

namespace ape
{
const char* tx_error_name(TxError e)
{
    switch (e)
    {
    case TxError::None: return "none";
    case TxError::InvalidNonce: return "invalid-nonce";
    case TxError::InsufficientBalance: return "insufficient-balance";
    case TxError::IntrinsicGasTooHigh: return "intrinsic-gas-too-high";
    case TxError::OutOfGas: return "out-of-gas";
    case TxError::StackUnderflow: return "stack-underflow";
    case TxError::StackOverflow: return "stack-overflow";
    case TxError::InvalidJump: return "invalid-jump";
    case TxError::InvalidOpcode: return "invalid-opcode";
    case TxError::StaticViolation: return "static-violation";
    case TxError::ReturndataOutOfBounds: return "returndata-out-of-bounds";
    case TxError::CallDepthExceeded: return "call-depth-exceeded";
    case TxError::AddressCollision: return "address-collision";
    case TxError::Create2Unsupported: return "create2-unsupported";
    case TxError::HookAbort: return "hook-abort";
    }
    return "?";
}

const char* call_kind_name(CallKind k)
{
    switch (k)
    {
    case CallKind::Transaction: return "TRANSACTION";
    case CallKind::Call: return "CALL";
    case CallKind::CallCode: return "CALLCODE";
    case CallKind::DelegateCall: return "DELEGATECALL";
    case CallKind::StaticCall: return "STATICCALL";
    case CallKind::Create: return "CREATE";
    }
    return "?";
}

namespace
{
constexpr int kMaxCallDepth = 1024;
constexpr size_t kMaxStack = 1024;
constexpr uint64_t kMemoryHardCap = 1u << 26;  // 64 MiB bound on any offset

const Address kIdentityPrecompile = [] {
    Address a{};
    a.bytes[19] = 0x04;
    return a;
}();

class Memory
{
public:
    uint64_t size() const { return data_.size(); }

    void touch(uint64_t offset, uint64_t len)
    {
        if (len != 0)
            ensure(offset + len);
    }

    Bytes read(uint64_t offset, uint64_t len)
    {
        if (len == 0)
            return {};
        ensure(offset + len);
        return Bytes(data_.begin() + offset, data_.begin() + offset + len);
    }

    void write(uint64_t offset, BytesView bytes)
    {
        if (bytes.empty())
            return;
        ensure(offset + bytes.size());
        std::copy(bytes.begin(), bytes.end(), data_.begin() + offset);
    }

    void write_byte(uint64_t offset, uint8_t b)
    {
        ensure(offset + 1);
        data_[offset] = b;
    }

private:
    void ensure(uint64_t end)
    {
        uint64_t need = (end + 31) / 32 * 32;
        if (need > data_.size())
            data_.resize(need, 0);
    }

    Bytes data_;
};

struct CallParams
{
    CallKind kind = CallKind::Call;
    Address code_address{};
    Address self{};
    Address caller{};
    Word value = 0;         // apparent value (CALLVALUE)
    bool transfer = false;  // move `value` caller -> self before running
    Bytes input;
    uint64_t gas = 0;
    bool is_static = false;
    uint64_t arg_offset = 0;  // caller-memory window `input` came from
    uint64_t arg_size = 0;
};

struct FrameResult
{
    TxStatus status = TxStatus::Success;
    TxError error = TxError::None;
    uint64_t gas_left = 0;
    Bytes output;
    std::optional<Address> created;
    std::vector<LogEntry> logs;
    std::set<Address> selfdestructs;

    bool ok() const { return status == TxStatus::Success; }
};

struct Frame
{
    uint64_t index = 0;
    int depth = 0;
    CallParams params;
    std::vector<Word> stack;
    Memory memory;
    Bytes return_buffer;
    uint64_t pc = 0;
    uint64_t gas = 0;
    uint64_t steps = 0;
    std::vector<LogEntry> logs;
    std::set<Address> selfdestructs;
};

class Machine;

class StepControlImpl final : public StepControl
{
public:
    StepControlImpl(Frame& f, Machine& m, bool allow) : frame_(f), machine_(m), allow_(allow) {}
    void set_stack(size_t index_from_top, const Word& value) override;
    void abort_transaction() override;

private:
    Frame& frame_;
    Machine& machine_;
    bool allow_;
};

class Machine
{
public:
    Machine(WorldState& state, const GasTable& gas, HookSet* hooks)
        : state(state), gas(gas), hooks(hooks)
    {}

    WorldState& state;
    const GasTable& gas;
    HookSet* hooks;
    Address origin{};
    Word gas_price = 0;
    uint64_t next_frame_index = 0;
    bool abort = false;

    FrameResult do_call(const CallParams& p, int depth, uint64_t parent_frame);
    FrameResult do_create(const Address& creator, const Word& value, const Bytes& init,
                          uint64_t gas_budget, int depth, uint64_t parent_frame);

private:
    FrameResult run_frame(const CallParams& p, const Bytes& code, int depth,
                          uint64_t parent_frame);
    void fire_enter(const Frame& f, uint64_t parent);
    void fire_exit(const Frame& f, const FrameResult& r, uint64_t ret_offset, uint64_t ret_size);

    friend class StepControlImpl;
};

void StepControlImpl::set_stack(size_t index_from_top, const Word& value)
{
    if (!allow_)
        throw std::logic_error("stack mutation requested on a read-only hook set");
    if (index_from_top >= frame_.stack.size())
        throw std::out_of_range("stack mutation index out of range");
    frame_.stack[frame_.stack.size() - 1 - index_from_top] = value;
}

void StepControlImpl::abort_transaction()
{
    machine_.abort = true;
}

std::vector<bool> jumpdest_map(const Bytes& code)
{
    std::vector<bool> valid(code.size(), false);
    for (size_t pc = 0; pc < code.size();)
    {
        uint8_t op = code[pc];
        if (op == OP_JUMPDEST)
            valid[pc] = true;
        pc += 1 + (is_push(op) ? push_size(op) : 0);
    }
    return valid;
}

uint64_t memory_cost(const GasTable& g, uint64_t size)
{
    uint64_t words = (size + 31) / 32;
    return g.memory_word * words + words * words / g.memory_quad_divisor;
}

uint64_t as_u64(const Word& w)
{
    // clamp so the hard-cap bounds check rejects absurd offsets
    return w > kMemoryHardCap * 2 ? kMemoryHardCap * 2 : static_cast<uint64_t>(w);
}

Word exp_word(Word base, Word e)
{
    Word r = 1;
    while (e != 0)
    {
        if ((e & 1) != 0)
            r *= base;
        base *= base;
        e >>= 1;
    }
    return r;
}

void Machine::fire_enter(const Frame& f, uint64_t parent)
{
    if (!hooks)
        return;
    FrameEnterEvent ev;
    ev.depth = f.depth;
    ev.frame_index = f.index;
    ev.parent_frame_index = parent;
    ev.kind = f.params.kind;
    ev.code_address = f.params.code_address;
    ev.self = f.params.self;
    ev.caller = f.params.caller;
    ev.value = f.params.value;
    ev.input = BytesView{f.params.input.data(), f.params.input.size()};
    ev.is_static = f.params.is_static;
    ev.arg_offset = f.params.arg_offset;
    ev.arg_size = f.params.arg_size;
    for (auto* h : hooks->hooks)
        h->on_frame_enter(ev);
}

void Machine::fire_exit(const Frame& f, const FrameResult& r, uint64_t ret_offset,
                        uint64_t ret_size)
{
    if (!hooks)
        return;
    FrameExitEvent ev;
    ev.frame_index = f.index;
    ev.depth = f.depth;
    ev.status = r.status;
    ev.output = BytesView{r.output.data(), r.output.size()};
    ev.ret_offset = ret_offset;
    ev.ret_size = ret_size;
    ev.created = r.created;
    for (auto* h : hooks->hooks)
        h->on_frame_exit(ev);
}

FrameResult Machine::do_call(const CallParams& p, int depth, uint64_t parent_frame)
{
    if (depth > kMaxCallDepth)
        return {TxStatus::HaltError, TxError::CallDepthExceeded, 0, {}, {}, {}, {}};

    auto snapshot = state.accounts;

    if (p.transfer && p.value != 0)
    {
        auto& from = state.get_or_create(p.caller);
        if (from.balance < p.value)
            return {TxStatus::HaltError, TxError::InsufficientBalance, p.gas, {}, {}, {}, {}};
        from.balance -= p.value;
        state.get_or_create(p.self).balance += p.value;
    }

    if (p.code_address == kIdentityPrecompile)
    {
        Frame stub;
        stub.index = next_frame_index++;
        stub.depth = depth;
        stub.params = p;
        fire_enter(stub, parent_frame);
        uint64_t words = (p.input.size() + 31) / 32;
        uint64_t cost = gas.identity_base + gas.identity_word * words;
        FrameResult r;
        if (cost > p.gas)
        {
            state.accounts = std::move(snapshot);
            r = {TxStatus::HaltError, TxError::OutOfGas, 0, {}, {}, {}, {}};
        }
        else
            r = {TxStatus::Success, TxError::None, p.gas - cost, p.input, {}, {}, {}};
        fire_exit(stub, r, 0, 0);
        return r;
    }

    const Account* code_acc = state.find(p.code_address);
    if (code_acc == nullptr || code_acc->code.empty())
    {
        // plain value transfer / call into empty code
        Frame stub;
        stub.index = next_frame_index++;
        stub.depth = depth;
        stub.params = p;
        fire_enter(stub, parent_frame);
        FrameResult r{TxStatus::Success, TxError::None, p.gas, {}, {}, {}, {}};
        fire_exit(stub, r, 0, 0);
        return r;
    }

    Bytes code = code_acc->code;  // frames may mutate state incl. this account
    FrameResult r = run_frame(p, code, depth, parent_frame);
    if (!r.ok())
        state.accounts = std::move(snapshot);
    return r;
}

FrameResult Machine::do_create(const Address& creator, const Word& value, const Bytes& init,
                               uint64_t gas_budget, int depth, uint64_t parent_frame)
{
    if (depth > kMaxCallDepth)
        return {TxStatus::HaltError, TxError::CallDepthExceeded, 0, {}, {}, {}, {}};

    auto snapshot = state.accounts;

    auto& creator_acc = state.get_or_create(creator);
    if (creator_acc.balance < value)
        return {TxStatus::HaltError, TxError::InsufficientBalance, gas_budget, {}, {}, {}, {}};

    uint64_t creation_nonce = creator_acc.nonce;
    creator_acc.nonce += 1;
    Address addr = create_address(creator, creation_nonce);

    if (const Account* existing = state.find(addr);
        existing && (!existing->code.empty() || existing->nonce != 0))
    {
        state.accounts = std::move(snapshot);
        return {TxStatus::HaltError, TxError::AddressCollision, 0, {}, {}, {}, {}};
    }

    {
        auto& fresh = state.get_or_create(addr);
        fresh.nonce = 1;
        fresh.balance += value;
        state.get_or_create(creator).balance -= value;
    }

    CallParams p;
    p.kind = CallKind::Create;
    p.code_address = addr;
    p.self = addr;
    p.caller = creator;
    p.value = value;
    p.gas = gas_budget;

    FrameResult r = run_frame(p, init, depth, parent_frame);
    if (r.ok())
    {
        uint64_t deposit = gas.code_deposit_byte * r.output.size();
        if (deposit > r.gas_left)
        {
            r = {TxStatus::HaltError, TxError::OutOfGas, 0, {}, {}, {}, {}};
        }
        else
        {
            r.gas_left -= deposit;
            state.get_or_create(addr).code = r.output;
            r.created = addr;
            r.output.clear();
        }
    }
    if (!r.ok())
        state.accounts = std::move(snapshot);
    return r;
}

FrameResult Machine::run_frame(const CallParams& p, const Bytes& code, int depth,
                               uint64_t parent_frame)
{
    Frame f;
    f.index = next_frame_index++;
    f.depth = depth;
    f.params = p;
    f.gas = p.gas;

    fire_enter(f, parent_frame);

    auto valid_dest = jumpdest_map(code);

    FrameResult result;
    auto finish = [&](TxStatus st, TxError err, Bytes output) {
        result.status = st;
        result.error = err;
        result.gas_left = (st == TxStatus::HaltError) ? 0 : f.gas;
        result.output = std::move(output);
        if (st == TxStatus::Success)
        {
            result.logs = std::move(f.logs);
            result.selfdestructs = std::move(f.selfdestructs);
        }
        fire_exit(f, result, 0, 0);
    };

    auto charge = [&](uint64_t amount) {
        if (amount > f.gas)
            return false;
        f.gas -= amount;
        return true;
    };
    auto charge_memory = [&](uint64_t offset, uint64_t len) {
        if (len == 0)
            return true;
        uint64_t end = offset + len;
        if (end > kMemoryHardCap)
            return false;
        uint64_t old_cost = memory_cost(gas, f.memory.size());
        uint64_t new_cost = memory_cost(gas, std::max<uint64_t>(end, f.memory.size()));
        if (!charge(new_cost - old_cost))
            return false;
        f.memory.touch(offset, len);
        return true;
    };

    while (true)
    {
        if (abort)
        {
            finish(TxStatus::HaltError, TxError::HookAbort, {});
            return result;
        }
        if (f.pc >= code.size())
        {
            finish(TxStatus::Success, TxError::None, {});  // implicit STOP
            return result;
        }

        uint8_t op = code[f.pc];
        const OpInfo& info = op_info(op);
        if (op == OP_CREATE2)
        {
            finish(TxStatus::HaltError, TxError::Create2Unsupported, {});
            return result;
        }
        if (info.name == nullptr || op == OP_INVALID)
        {
            finish(TxStatus::HaltError, TxError::InvalidOpcode, {});
            return result;
        }

        if (f.stack.size() < info.pops)
        {
            finish(TxStatus::HaltError, TxError::StackUnderflow, {});
            return result;
        }
        size_t grow = info.pushes > info.pops ? info.pushes - info.pops : 0;
        if (f.stack.size() + grow > kMaxStack)
        {
            finish(TxStatus::HaltError, TxError::StackOverflow, {});
            return result;
        }

        auto top = [&](size_t i) -> Word& { return f.stack[f.stack.size() - 1 - i]; };

        uint64_t gas_at_instr = f.gas;
        bool gas_ok = charge(gas.op_cost[op]);

        // dynamic costs, charged before the pre-step hook fires
        if (gas_ok)
        {
            switch (op)
            {
            case OP_KECCAK256: {
                uint64_t len = as_u64(top(1));
                gas_ok = charge_memory(as_u64(top(0)), len) &&
                         charge(gas.keccak_word * ((len + 31) / 32));
                break;
            }
            case OP_CALLDATACOPY:
            case OP_CODECOPY:
            case OP_RETURNDATACOPY: {
                uint64_t len = as_u64(top(2));
                gas_ok =
                    charge_memory(as_u64(top(0)), len) && charge(gas.copy_word * ((len + 31) / 32));
                break;
            }
            case OP_EXTCODECOPY: {
                uint64_t len = as_u64(top(3));
                gas_ok =
                    charge_memory(as_u64(top(1)), len) && charge(gas.copy_word * ((len + 31) / 32));
                break;
            }
            case OP_EXP: {
                Word e = top(1);
                uint64_t nbytes = 0;
                while (e != 0)
                {
                    ++nbytes;
                    e >>= 8;
                }
                gas_ok = charge(gas.exp_byte * nbytes);
                break;
            }
            case OP_MLOAD:
            case OP_MSTORE:
                gas_ok = charge_memory(as_u64(top(0)), 32);
                break;
            case OP_MSTORE8:
                gas_ok = charge_memory(as_u64(top(0)), 1);
                break;
            case OP_LOG0:
            case OP_LOG1:
            case OP_LOG2:
            case OP_LOG3:
            case OP_LOG4: {
                if (f.params.is_static)
                {
                    finish(TxStatus::HaltError, TxError::StaticViolation, {});
                    return result;
                }
                unsigned topics = op - OP_LOG0;
                uint64_t len = as_u64(top(1));
                gas_ok = charge_memory(as_u64(top(0)), len) &&
                         charge(gas.log_topic * topics + gas.log_data_byte * len);
                break;
            }
            case OP_SSTORE: {
                if (f.params.is_static)
                {
                    finish(TxStatus::HaltError, TxError::StaticViolation, {});
                    return result;
                }
                Word cur = 0;
                if (const Account* self_acc = state.find(f.params.self))
                {
                    auto it = self_acc->storage.find(top(0));
                    if (it != self_acc->storage.end())
                        cur = it->second;
                }
                gas_ok = charge((cur == 0 && top(1) != 0) ? gas.sstore_set : gas.sstore_reset);
                break;
            }
            case OP_RETURN:
            case OP_REVERT:
                gas_ok = charge_memory(as_u64(top(0)), as_u64(top(1)));
                break;
            case OP_CALL:
            case OP_CALLCODE:
                gas_ok = charge_memory(as_u64(top(3)), as_u64(top(4))) &&
                         charge_memory(as_u64(top(5)), as_u64(top(6)));
                break;
            case OP_DELEGATECALL:
            case OP_STATICCALL:
                gas_ok = charge_memory(as_u64(top(2)), as_u64(top(3))) &&
                         charge_memory(as_u64(top(4)), as_u64(top(5)));
                break;
            case OP_CREATE:
                gas_ok = charge_memory(as_u64(top(1)), as_u64(top(2)));
                break;
            case OP_SELFDESTRUCT: {
                if (f.params.is_static)
                {
                    finish(TxStatus::HaltError, TxError::StaticViolation, {});
                    return result;
                }
                auto beneficiary = address_from_word(top(0));
                bool absent = beneficiary && state.find(*beneficiary) == nullptr;
                if (absent && state.balance_of(f.params.self) != 0)
                    gas_ok = charge(gas.call_new_account);
                break;
            }
            default:
                break;
            }
        }
        if (!gas_ok)
        {
            finish(TxStatus::HaltError, TxError::OutOfGas, {});
            return result;
        }

        StepEvent ev;
        ev.depth = f.depth;
        ev.frame_index = f.index;
        ev.step_index = f.steps;
        ev.code_address = f.params.code_address;
        ev.self = f.params.self;
        ev.pc = f.pc;
        ev.op = op;
        ev.gas_left = gas_at_instr;
        ev.stack = std::span<const Word>(f.stack.data(), f.stack.size());
        if (hooks)
        {
            StepControlImpl ctl(f, *this, hooks->allow_stack_mutation);
            for (auto* h : hooks->hooks)
                h->on_step_pre(ev, ctl);
            if (abort)
            {
                finish(TxStatus::HaltError, TxError::HookAbort, {});
                return result;
            }
        }
        f.steps += 1;

        auto pop = [&]() {
            Word w = f.stack.back();
            f.stack.pop_back();
            return w;
        };
        auto push = [&](const Word& w) { f.stack.push_back(w); };
        auto fire_post = [&]() {
            if (hooks)
            {
                StepEvent pe = ev;
                pe.stack = std::span<const Word>(f.stack.data(), f.stack.size());
                for (auto* h : hooks->hooks)
                    h->on_step_post(pe, f.gas);
            }
        };

        uint64_t next_pc = f.pc + 1 + info.immediate;

        switch (op)
        {
        case OP_STOP:
            fire_post();
            finish(TxStatus::Success, TxError::None, {});
            return result;

        case OP_ADD: {
            Word a = pop(), b = pop();
            push(a + b);
            break;
        }
        case OP_MUL: {
            Word a = pop(), b = pop();
            push(a * b);
            break;
        }
        case OP_SUB: {
            Word a = pop(), b = pop();
            push(a - b);
            break;
        }
        case OP_DIV: {
            Word a = pop(), b = pop();
            push(b == 0 ? Word{0} : a / b);
            break;
        }
        case OP_SDIV: {
            Word a = pop(), b = pop();
            if (b == 0)
                push(0);
            else
            {
                bool neg = word_is_neg(a) != word_is_neg(b);
                Word ua = word_is_neg(a) ? word_neg(a) : a;
                Word ub = word_is_neg(b) ? word_neg(b) : b;
                Word q = ua / ub;
                push(neg ? word_neg(q) : q);
            }
            break;
        }
        case OP_MOD: {
            Word a = pop(), b = pop();
            push(b == 0 ? Word{0} : a % b);
            break;
        }
        case OP_SMOD: {
            Word a = pop(), b = pop();
            if (b == 0)
                push(0);
            else
            {
                Word ua = word_is_neg(a) ? word_neg(a) : a;
                Word ub = word_is_neg(b) ? word_neg(b) : b;
                Word r = ua % ub;
                push(word_is_neg(a) ? word_neg(r) : r);
            }
            break;
        }
        case OP_ADDMOD: {
            using u512 = boost::multiprecision::uint512_t;
            Word a = pop(), b = pop(), n = pop();
            push(n == 0 ? Word{0} : Word((u512(a) + u512(b)) % u512(n)));
            break;
        }
        case OP_MULMOD: {
            using u512 = boost::multiprecision::uint512_t;
            Word a = pop(), b = pop(), n = pop();
            push(n == 0 ? Word{0} : Word((u512(a) * u512(b)) % u512(n)));
            break;
        }
        case OP_EXP: {
            Word a = pop(), e = pop();
            push(exp_word(a, e));
            break;
        }
        case OP_SIGNEXTEND: {
            Word k = pop(), v = pop();
            if (k < 31)
            {
                unsigned bit = static_cast<unsigned>(k) * 8 + 7;
                Word mask = (Word{1} << (bit + 1)) - 1;
                if ((v >> bit & 1) != 0)
                    push(v | ~mask);
                else
                    push(v & mask);
            }
            else
                push(v);
            break;
        }
        case OP_LT: {
            Word a = pop(), b = pop();
            push(a < b ? 1 : 0);
            break;
        }
        case OP_GT: {
            Word a = pop(), b = pop();
            push(a > b ? 1 : 0);
            break;
        }
        case OP_SLT: {
            Word a = pop(), b = pop();
            bool na = word_is_neg(a), nb = word_is_neg(b);
            push(na != nb ? (na ? 1 : 0) : (a < b ? 1 : 0));
            break;
        }
        case OP_SGT: {
            Word a = pop(), b = pop();
            bool na = word_is_neg(a), nb = word_is_neg(b);
            push(na != nb ? (nb ? 1 : 0) : (a > b ? 1 : 0));
            break;
        }
        case OP_EQ: {
            Word a = pop(), b = pop();
            push(a == b ? 1 : 0);
            break;
        }
        case OP_ISZERO:
            top(0) = (top(0) == 0) ? 1 : 0;
            break;
        case OP_AND: {
            Word a = pop(), b = pop();
            push(a & b);
            break;
        }
        case OP_OR: {
            Word a = pop(), b = pop();
            push(a | b);
            break;
        }
        case OP_XOR: {
            Word a = pop(), b = pop();
            push(a ^ b);
            break;
        }
        case OP_NOT:
            top(0) = ~top(0);
            break;
        case OP_BYTE: {
            Word i = pop(), x = pop();
            push(i > 31 ? Word{0} : (x >> (8 * (31 - static_cast<unsigned>(i)))) & 0xff);
            break;
        }
        case OP_SHL: {
            Word s = pop(), v = pop();
            push(s > 255 ? Word{0} : v << static_cast<unsigned>(s));
            break;
        }
        case OP_SHR: {
            Word s = pop(), v = pop();
            push(s > 255 ? Word{0} : v >> static_cast<unsigned>(s));
            break;
        }
        case OP_SAR: {
            Word s = pop(), v = pop();
            bool neg = word_is_neg(v);
            if (s > 255)
                push(neg ? ~Word{0} : Word{0});
            else
            {
                unsigned sh = static_cast<unsigned>(s);
                Word r = v >> sh;
                if (neg && sh > 0)
                    r |= ~Word{0} << (256 - sh);
                push(r);
            }
            break;
        }

        case OP_KECCAK256: {
            uint64_t off = as_u64(pop());
            uint64_t len = as_u64(pop());
            Bytes data = f.memory.read(off, len);
            push(keccak256_word(data));
            break;
        }

        case OP_ADDRESS:
            push(word_from_address(f.params.self));
            break;
        case OP_BALANCE: {
            auto a = address_from_word(pop());
            push(a ? state.balance_of(*a) : 0);
            break;
        }
        case OP_ORIGIN:
            push(word_from_address(origin));
            break;
        case OP_CALLER:
            push(word_from_address(f.params.caller));
            break;
        case OP_CALLVALUE:
            push(f.params.value);
            break;
        case OP_CALLDATALOAD: {
            uint64_t off = as_u64(pop());
            uint8_t buf[32] = {};
            const Bytes& in = f.params.input;
            for (unsigned i = 0; i < 32; ++i)
                if (off + i < in.size())
                    buf[i] = in[off + i];
            push(word_from_bytes(BytesView{buf, 32}));
            break;
        }
        case OP_CALLDATASIZE:
            push(f.params.input.size());
            break;
        case OP_CALLDATACOPY: {
            uint64_t dst = as_u64(pop()), src = as_u64(pop()), len = as_u64(pop());
            Bytes chunk(len, 0);
            const Bytes& in = f.params.input;
            for (uint64_t i = 0; i < len; ++i)
                if (src + i < in.size())
                    chunk[i] = in[src + i];
            f.memory.write(dst, chunk);
            break;
        }
        case OP_CODESIZE:
            push(code.size());
            break;
        case OP_CODECOPY: {
            uint64_t dst = as_u64(pop()), src = as_u64(pop()), len = as_u64(pop());
            Bytes chunk(len, 0);
            for (uint64_t i = 0; i < len; ++i)
                if (src + i < code.size())
                    chunk[i] = code[src + i];
            f.memory.write(dst, chunk);
            break;
        }
        case OP_GASPRICE:
            push(gas_price);
            break;
        case OP_EXTCODESIZE: {
            auto a = address_from_word(pop());
            const Account* acc = a ? state.find(*a) : nullptr;
            push(acc ? acc->code.size() : 0);
            break;
        }
        case OP_EXTCODECOPY: {
            auto a = address_from_word(pop());
            uint64_t dst = as_u64(pop()), src = as_u64(pop()), len = as_u64(pop());
            const Account* acc = a ? state.find(*a) : nullptr;
            Bytes chunk(len, 0);
            if (acc)
                for (uint64_t i = 0; i < len; ++i)
                    if (src + i < acc->code.size())
                        chunk[i] = acc->code[src + i];
            f.memory.write(dst, chunk);
            break;
        }
        case OP_RETURNDATASIZE:
            push(f.return_buffer.size());
            break;
        case OP_RETURNDATACOPY: {
            uint64_t dst = as_u64(pop()), src = as_u64(pop()), len = as_u64(pop());
            if (src + len > f.return_buffer.size())
            {
                finish(TxStatus::HaltError, TxError::ReturndataOutOfBounds, {});
                return result;
            }
            f.memory.write(dst, BytesView{f.return_buffer.data() + src, len});
            break;
        }
        case OP_EXTCODEHASH: {
            auto a = address_from_word(pop());
            const Account* acc = a ? state.find(*a) : nullptr;
            push(acc ? keccak256_word(BytesView{acc->code.data(), acc->code.size()}) : 0);
            break;
        }

        case OP_BLOCKHASH: {
            Word n = pop();
            auto be = to_bytes32(n);
            push(keccak256_word(BytesView{be.data(), be.size()}));  // deterministic pseudo-hash
            break;
        }
        case OP_COINBASE:
            push(word_from_address(state.block.coinbase));
            break;
        case OP_TIMESTAMP:
            push(state.block.timestamp);
            break;
        case OP_NUMBER:
            push(state.block.number);
            break;
        case OP_DIFFICULTY:
            push(0);
            break;
        case OP_GASLIMIT:
            push(state.block.gas_limit);
            break;
        case OP_CHAINID:
            push(state.block.chain_id);
            break;
        case OP_SELFBALANCE:
            push(state.balance_of(f.params.self));
            break;

        case OP_POP:
            pop();
            break;
        case OP_MLOAD: {
            uint64_t off = as_u64(pop());
            push(word_from_bytes(f.memory.read(off, 32)));
            break;
        }
        case OP_MSTORE: {
            uint64_t off = as_u64(pop());
            auto b32 = to_bytes32(pop());
            f.memory.write(off, BytesView{b32.data(), b32.size()});
            break;
        }
        case OP_MSTORE8: {
            uint64_t off = as_u64(pop());
            Word v = pop();
            f.memory.write_byte(off, static_cast<uint8_t>(v & 0xff));
            break;
        }
        case OP_SLOAD: {
            Word slot = pop();
            Word v = 0;
            if (const Account* acc = state.find(f.params.self))
            {
                auto it = acc->storage.find(slot);
                if (it != acc->storage.end())
                    v = it->second;
            }
            push(v);
            break;
        }
        case OP_SSTORE: {
            Word slot = pop(), v = pop();
            auto& acc = state.get_or_create(f.params.self);
            if (v == 0)
                acc.storage.erase(slot);
            else
                acc.storage[slot] = v;
            break;
        }
        case OP_JUMP: {
            uint64_t dest = as_u64(pop());
            if (dest >= code.size() || !valid_dest[dest])
            {
                finish(TxStatus::HaltError, TxError::InvalidJump, {});
                return result;
            }
            next_pc = dest;
            break;
        }
        case OP_JUMPI: {
            uint64_t dest = as_u64(pop());
            Word cond = pop();
            if (cond != 0)
            {
                if (dest >= code.size() || !valid_dest[dest])
                {
                    finish(TxStatus::HaltError, TxError::InvalidJump, {});
                    return result;
                }
                next_pc = dest;
            }
            break;
        }
        case OP_PC:
            push(f.pc);
            break;
        case OP_MSIZE:
            push(f.memory.size());
            break;
        case OP_GAS:
            push(f.gas);
            break;
        case OP_JUMPDEST:
            break;

        case OP_LOG0:
        case OP_LOG1:
        case OP_LOG2:
        case OP_LOG3:
        case OP_LOG4: {
            unsigned topics = op - OP_LOG0;
            uint64_t off = as_u64(pop()), len = as_u64(pop());
            LogEntry log;
            log.emitter = f.params.self;
            for (unsigned i = 0; i < topics; ++i)
                log.topics.push_back(pop());
            log.data = f.memory.read(off, len);
            f.logs.push_back(std::move(log));
            break;
        }

        case OP_CREATE: {
            if (f.params.is_static)
            {
                finish(TxStatus::HaltError, TxError::StaticViolation, {});
                return result;
            }
            Word value = pop();
            uint64_t off = as_u64(pop()), len = as_u64(pop());
            Bytes init = f.memory.read(off, len);
            uint64_t child_gas = f.gas - f.gas / 64;
            f.gas -= child_gas;
            FrameResult r = do_create(f.params.self, value, init, child_gas, depth + 1, f.index);
            f.gas += r.gas_left;
            f.return_buffer = r.ok() ? Bytes{} : r.output;
            if (r.ok())
            {
                for (auto& l : r.logs)
                    f.logs.push_back(std::move(l));
                f.selfdestructs.merge(r.selfdestructs);
                push(word_from_address(*r.created));
            }
            else
                push(0);
            break;
        }

        case OP_CALL:
        case OP_CALLCODE:
        case OP_DELEGATECALL:
        case OP_STATICCALL: {
            bool has_value = (op == OP_CALL || op == OP_CALLCODE);
            Word gas_req = pop();
            Word target_w = pop();
            Word value = has_value ? pop() : 0;
            uint64_t arg_off = as_u64(pop()), arg_len = as_u64(pop());
            uint64_t ret_off = as_u64(pop()), ret_len = as_u64(pop());

            if (op == OP_CALL && f.params.is_static && value != 0)
            {
                finish(TxStatus::HaltError, TxError::StaticViolation, {});
                return result;
            }

            auto target = address_from_word(target_w);
            if (!target)
            {
                push(0);
                f.return_buffer.clear();
                break;
            }

            uint64_t extra = 0;
            if (op == OP_CALL && value != 0 && state.find(*target) == nullptr)
                extra += gas.call_new_account;
            if (has_value && value != 0)
                extra += gas.call_value_transfer;
            if (!charge(extra))
            {
                finish(TxStatus::HaltError, TxError::OutOfGas, {});
                return result;
            }

            uint64_t available = f.gas - f.gas / 64;
            uint64_t forwarded = std::min<uint64_t>(available, word_to_u64_clamped(gas_req));
            f.gas -= forwarded;
            uint64_t child_gas = forwarded + (has_value && value != 0 ? gas.call_stipend : 0);

            CallParams cp;
            cp.gas = child_gas;
            cp.input = f.memory.read(arg_off, arg_len);
            cp.arg_offset = arg_off;
            cp.arg_size = arg_len;
            switch (op)
            {
            case OP_CALL:
                cp.kind = CallKind::Call;
                cp.code_address = *target;
                cp.self = *target;
                cp.caller = f.params.self;
                cp.value = value;
                cp.transfer = true;
                cp.is_static = f.params.is_static;
                break;
            case OP_CALLCODE:
                cp.kind = CallKind::CallCode;
                cp.code_address = *target;
                cp.self = f.params.self;
                cp.caller = f.params.self;
                cp.value = value;
                cp.transfer = false;  // self-to-self
                cp.is_static = f.params.is_static;
                if (state.balance_of(f.params.self) < value)
                {
                    f.gas += forwarded;
                    push(0);
                    f.return_buffer.clear();
                    goto call_done;
                }
                break;
            case OP_DELEGATECALL:
                cp.kind = CallKind::DelegateCall;
                cp.code_address = *target;
                cp.self = f.params.self;
                cp.caller = f.params.caller;
                cp.value = f.params.value;
                cp.transfer = false;
                cp.is_static = f.params.is_static;
                break;
            default:  // STATICCALL
                cp.kind = CallKind::StaticCall;
                cp.code_address = *target;
                cp.self = *target;
                cp.caller = f.params.self;
                cp.value = 0;
                cp.transfer = false;
                cp.is_static = true;
                break;
            }

            {
                FrameResult r = do_call(cp, depth + 1, f.index);
                if (r.error == TxError::InsufficientBalance ||
                    r.error == TxError::CallDepthExceeded)
                {
                    // nothing ran; forwarded gas comes back
                    f.gas += forwarded;
                    push(0);
                    f.return_buffer.clear();
                }
                else
                {
                    f.gas += r.gas_left;
                    f.return_buffer = r.output;
                    if (ret_len > 0)
                    {
                        f.memory.touch(ret_off, ret_len);
                        uint64_t n = std::min<uint64_t>(ret_len, r.output.size());
                        if (n > 0)
                            f.memory.write(ret_off, BytesView{r.output.data(), n});
                    }
                    if (r.ok())
                    {
                        for (auto& l : r.logs)
                            f.logs.push_back(std::move(l));
                        f.selfdestructs.merge(r.selfdestructs);
                    }
                    push(r.ok() ? 1 : 0);
                }
            }
        call_done:
            break;
        }

        case OP_RETURN: {
            uint64_t off = as_u64(pop()), len = as_u64(pop());
            Bytes out = f.memory.read(off, len);
            fire_post();
            finish(TxStatus::Success, TxError::None, std::move(out));
            return result;
        }
        case OP_REVERT: {
            uint64_t off = as_u64(pop()), len = as_u64(pop());
            Bytes out = f.memory.read(off, len);
            fire_post();
            result.status = TxStatus::Revert;
            result.error = TxError::None;
            result.gas_left = f.gas;
            result.output = std::move(out);
            fire_exit(f, result, 0, 0);
            return result;
        }
        case OP_SELFDESTRUCT: {
            auto beneficiary = address_from_word(pop());
            Word bal = state.balance_of(f.params.self);
            if (beneficiary)
            {
                state.get_or_create(f.params.self).balance = 0;
                state.get_or_create(*beneficiary).balance += bal;
            }
            f.selfdestructs.insert(f.params.self);
            fire_post();
            finish(TxStatus::Success, TxError::None, {});
            return result;
        }

        default:
            if (is_push(op))
            {
                unsigned n = push_size(op);
                uint8_t buf[32] = {};
                for (unsigned i = 0; i < n; ++i)
                    if (f.pc + 1 + i < code.size())
                        buf[32 - n + i] = code[f.pc + 1 + i];
                push(word_from_bytes(BytesView{buf, 32}));
            }
            else if (op >= OP_DUP1 && op <= OP_DUP16)
            {
                push(top(op - OP_DUP1));
            }
            else if (op >= OP_SWAP1 && op <= OP_SWAP16)
            {
                std::swap(top(0), top(op - OP_SWAP1 + 1));
            }
            else
            {
                finish(TxStatus::HaltError, TxError::InvalidOpcode, {});
                return result;
            }
            break;
        }

        fire_post();
        f.pc = next_pc;
    }
}

}  // namespace

uint64_t intrinsic_gas(const Transaction& tx, const GasTable& gas)
{
    uint64_t g = gas.tx_base;
    for (uint8_t b : tx.data)
        g += b == 0 ? gas.tx_data_zero : gas.tx_data_nonzero;
    return g;
}

ExecutionResult execute_transaction(WorldState& state, const Transaction& tx, const GasTable& gas,
                                    HookSet* hooks)
{
    ExecutionResult res;

    const Account* sender = state.find(tx.sender);
    uint64_t sender_nonce = sender ? sender->nonce : 0;
    if (tx.nonce != sender_nonce)
    {
        res.status = TxStatus::HaltError;
        res.error = TxError::InvalidNonce;
        return res;
    }
    Word upfront = tx.value + Word{tx.gas_limit} * tx.gas_price;
    if (state.balance_of(tx.sender) < upfront)
    {
        res.status = TxStatus::HaltError;
        res.error = TxError::InsufficientBalance;
        return res;
    }
    uint64_t intrinsic = intrinsic_gas(tx, gas);
    if (intrinsic > tx.gas_limit)
    {
        res.status = TxStatus::HaltError;
        res.error = TxError::IntrinsicGasTooHigh;
        return res;
    }

    auto& sender_acc = state.get_or_create(tx.sender);
    sender_acc.nonce += 1;
    sender_acc.balance -= Word{tx.gas_limit} * tx.gas_price;

    Machine m(state, gas, hooks);
    m.origin = tx.sender;
    m.gas_price = tx.gas_price;

    uint64_t frame_gas = tx.gas_limit - intrinsic;
    FrameResult r;
    if (tx.to)
    {
        CallParams p;
        p.kind = CallKind::Transaction;
        p.code_address = *tx.to;
        p.self = *tx.to;
        p.caller = tx.sender;
        p.value = tx.value;
        p.transfer = true;
        p.input = tx.data;
        p.gas = frame_gas;
        r = m.do_call(p, 0, 0);
    }
    else
    {
        uint64_t create_cost = gas.create;
        if (create_cost > frame_gas)
            r = {TxStatus::HaltError, TxError::OutOfGas, 0, {}, {}, {}, {}};
        else
            r = m.do_create(tx.sender, tx.value, tx.data, frame_gas - create_cost, 0, 0);
    }

    // a failed top-level value transfer is a halting condition, not a revert
    uint64_t gas_left = r.gas_left;
    res.status = r.status;
    res.error = r.error;
    res.return_data = r.output;
    res.gas_used = tx.gas_limit - gas_left;
    if (r.ok())
    {
        res.logs = std::move(r.logs);
        for (const Address& a : r.selfdestructs)
            state.accounts.erase(a);
    }

    auto& sender_after = state.get_or_create(tx.sender);
    sender_after.balance += Word{gas_left} * tx.gas_price;
    state.get_or_create(state.block.coinbase).balance += Word{res.gas_used} * tx.gas_price;

    return res;
}

DeployOutcome deploy_contract(WorldState& state, const Address& creator, BytesView code,
                              DeployMode mode, const GasTable& gas,
                              const std::map<Word, Word>& storage_init, uint64_t gas_limit)
{
    auto& creator_acc = state.get_or_create(creator);
    Address addr = create_address(creator, creator_acc.nonce);
    if (const Account* existing = state.find(addr);
        existing && (!existing->code.empty() || existing->nonce != 0))
        throw AddressCollisionError("deployment address already in use: " + to_hex(addr));

    DeployOutcome out;
    out.address = addr;

    if (mode == DeployMode::DirectRuntime)
    {
        creator_acc.nonce += 1;
        auto& acc = state.get_or_create(addr);
        acc.nonce = 1;
        acc.code.assign(code.begin(), code.end());
        out.gas_used = gas.code_deposit_byte * code.size();
    }
    else
    {
        Machine m(state, gas, nullptr);
        m.origin = creator;
        Bytes init(code.begin(), code.end());
        FrameResult r = m.do_create(creator, 0, init, gas_limit, 0, 0);
        if (!r.ok())
            throw DeployError(std::string("init code failed: ") + tx_error_name(r.error));
        out.gas_used = gas_limit - r.gas_left;
    }

    if (!storage_init.empty())
    {
        auto& acc = state.get_or_create(addr);
        for (const auto& [slot, value] : storage_init)
        {
            if (value != 0)
                acc.storage[slot] = value;
            out.gas_used += gas.sstore_set;
        }
    }
    return out;
}

}  // namespace ape
