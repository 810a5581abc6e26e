// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "ape/common.hpp"
#include "ape/opcodes.hpp"

namespace ape
{
struct AssemblyError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// Two-pass bytecode builder with labels. Label pushes are emitted as PUSH2
/// (64 KiB of code is far beyond anything here) and resolved at assemble().
class Assembler
{
public:
    Assembler& op(uint8_t opcode);
    Assembler& push(const Word& value);           // minimal-width PUSH
    Assembler& push(const Word& value, unsigned width);
    Assembler& push_address(const Address& a);    // PUSH20
    Assembler& push_label(const std::string& name);
    Assembler& label(const std::string& name);
    Assembler& raw(BytesView bytes);
    Assembler& pad_to(size_t pc, uint8_t filler = OP_STOP);

    size_t size() const { return code_.size(); }
    Bytes assemble() const;  // throws AssemblyError on unresolved labels

private:
    Bytes code_;
    std::map<std::string, size_t> labels_;
    std::vector<std::pair<size_t, std::string>> fixups_;  // offset of 2-byte immediate
};

struct Instruction
{
    uint64_t pc = 0;
    uint8_t op = 0;
    Word immediate = 0;      // PUSH payload (zero-extended)
    unsigned size = 1;       // 1 + immediate bytes
    bool truncated = false;  // PUSH runs past the end of code
};

/// Decodes the instruction at `pc`; behaves like the interpreter (truncated
/// PUSH payloads are zero-filled).
Instruction decode_instruction(BytesView code, uint64_t pc);

/// Linear sweep over the whole code blob.
std::vector<Instruction> disassemble(BytesView code);

std::string format_instruction(const Instruction& ins);

}  // namespace ape
