// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#include "ape/assembler.hpp"

namespace ape
{
Assembler& Assembler::op(uint8_t opcode)
{
    code_.push_back(opcode);
    return *this;
}

Assembler& Assembler::push(const Word& value)
{
    unsigned width = 1;
    Word v = value >> 8;
    while (v != 0)
    {
        ++width;
        v >>= 8;
    }
    return push(value, width);
}

Assembler& Assembler::push(const Word& value, unsigned width)
{
    if (width == 0 || width > 32)
        throw AssemblyError("push width out of range");
    if (width < 32 && (value >> (8 * width)) != 0)
        throw AssemblyError("push value does not fit in " + std::to_string(width) + " bytes");
    code_.push_back(push_op(width));
    auto b32 = to_bytes32(value);
    code_.insert(code_.end(), b32.end() - width, b32.end());
    return *this;
}

Assembler& Assembler::push_address(const Address& a)
{
    code_.push_back(OP_PUSH20);
    code_.insert(code_.end(), a.bytes.begin(), a.bytes.end());
    return *this;
}

Assembler& Assembler::push_label(const std::string& name)
{
    code_.push_back(OP_PUSH1 + 1);  // PUSH2
    fixups_.emplace_back(code_.size(), name);
    code_.push_back(0);
    code_.push_back(0);
    return *this;
}

Assembler& Assembler::label(const std::string& name)
{
    if (!labels_.emplace(name, code_.size()).second)
        throw AssemblyError("duplicate label: " + name);
    return *this;
}

Assembler& Assembler::raw(BytesView bytes)
{
    code_.insert(code_.end(), bytes.begin(), bytes.end());
    return *this;
}

Assembler& Assembler::pad_to(size_t pc, uint8_t filler)
{
    if (pc < code_.size())
        throw AssemblyError("pad_to target before current position");
    code_.resize(pc, filler);
    return *this;
}

Bytes Assembler::assemble() const
{
    Bytes out = code_;
    for (const auto& [offset, name] : fixups_)
    {
        auto it = labels_.find(name);
        if (it == labels_.end())
            throw AssemblyError("unresolved label: " + name);
        size_t target = it->second;
        if (target > 0xffff)
            throw AssemblyError("label beyond PUSH2 range: " + name);
        out[offset] = static_cast<uint8_t>(target >> 8);
        out[offset + 1] = static_cast<uint8_t>(target & 0xff);
    }
    return out;
}

Instruction decode_instruction(BytesView code, uint64_t pc)
{
    Instruction ins;
    ins.pc = pc;
    ins.op = code[pc];
    if (is_push(ins.op))
    {
        unsigned n = push_size(ins.op);
        ins.size = 1 + n;
        uint8_t buf[32] = {};
        for (unsigned i = 0; i < n; ++i)
        {
            if (pc + 1 + i < code.size())
                buf[32 - n + i] = code[pc + 1 + i];
            else
                ins.truncated = true;
        }
        ins.immediate = word_from_bytes(BytesView{buf, 32});
    }
    return ins;
}

std::vector<Instruction> disassemble(BytesView code)
{
    std::vector<Instruction> out;
    for (uint64_t pc = 0; pc < code.size();)
    {
        out.push_back(decode_instruction(code, pc));
        pc += out.back().size;
    }
    return out;
}

std::string format_instruction(const Instruction& ins)
{
    const OpInfo& info = op_info(ins.op);
    char pcbuf[16];
    std::snprintf(pcbuf, sizeof(pcbuf), "0x%03llx", static_cast<unsigned long long>(ins.pc));
    std::string s = std::string(pcbuf) + ": ";
    if (info.name == nullptr)
        return s + "UNDEFINED(0x" + to_hex(BytesView{&ins.op, 1}).substr(2) + ")";
    s += info.name;
    if (is_push(ins.op))
        s += " " + to_hex(ins.immediate);
    return s;
}

}  // namespace ape
