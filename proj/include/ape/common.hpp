// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace ape
{
/// 256-bit EVM word. Unsigned fixed-width: all arithmetic wraps modulo 2^256.
using Word = boost::multiprecision::uint256_t;

using Bytes = std::vector<uint8_t>;
using BytesView = std::span<const uint8_t>;

/// 20-byte account identifier.
struct Address
{
    std::array<uint8_t, 20> bytes{};

    auto operator<=>(const Address&) const = default;

    bool is_zero() const
    {
        for (auto b : bytes)
            if (b != 0)
                return false;
        return true;
    }
};

struct HexError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

// hex helpers ("0x" prefix optional on input, always emitted on output)
std::string to_hex(BytesView data);
std::string to_hex(const Address& a);
std::string to_hex(const Word& w);  // minimal-length quantity encoding, "0x0" for zero
std::string to_hex32(const Word& w);  // fixed 32-byte encoding

Bytes from_hex(std::string_view hex);
Address address_from_hex(std::string_view hex);
Word word_from_hex(std::string_view hex);

// big-endian conversions
std::array<uint8_t, 32> to_bytes32(const Word& w);
Word word_from_bytes(BytesView data);  // up to 32 bytes, big-endian
Word word_from_address(const Address& a);
std::optional<Address> address_from_word(const Word& w);  // nullopt if w >= 2^160

/// Keccak-256 (the pre-NIST padding variant used by the EVM).
std::array<uint8_t, 32> keccak256(BytesView data);
Word keccak256_word(BytesView data);

/// Contract creation address: keccak256(rlp([creator, nonce]))[12:].
Address create_address(const Address& creator, uint64_t nonce);

// two's-complement helpers for signed opcodes
bool word_is_neg(const Word& w);
Word word_neg(const Word& w);

inline uint64_t word_to_u64_clamped(const Word& w)
{
    if (w > std::numeric_limits<uint64_t>::max())
        return std::numeric_limits<uint64_t>::max();
    return static_cast<uint64_t>(w);
}

}  // namespace ape
