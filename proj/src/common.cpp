// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#include "ape/common.hpp"

#include <algorithm>
#include <cstring>

namespace ape
{
namespace
{
constexpr char hexdigits[] = "0123456789abcdef";

int hex_value(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

std::string_view strip_0x(std::string_view s)
{
    if (s.size() >= 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X'))
        return s.substr(2);
    return s;
}
}  // namespace

std::string to_hex(BytesView data)
{
    std::string out = "0x";
    out.reserve(2 + data.size() * 2);
    for (uint8_t b : data)
    {
        out += hexdigits[b >> 4];
        out += hexdigits[b & 0xf];
    }
    return out;
}

std::string to_hex(const Address& a)
{
    return to_hex(BytesView{a.bytes.data(), a.bytes.size()});
}

std::string to_hex(const Word& w)
{
    if (w == 0)
        return "0x0";
    auto b32 = to_bytes32(w);
    size_t i = 0;
    while (b32[i] == 0)
        ++i;
    std::string out = "0x";
    bool first = true;
    for (; i < 32; ++i)
    {
        if (!(first && (b32[i] >> 4) == 0))
            out += hexdigits[b32[i] >> 4];
        out += hexdigits[b32[i] & 0xf];
        first = false;
    }
    return out;
}

std::string to_hex32(const Word& w)
{
    auto b32 = to_bytes32(w);
    return to_hex(BytesView{b32.data(), b32.size()});
}

Bytes from_hex(std::string_view hex)
{
    auto s = strip_0x(hex);
    if (s.size() % 2 != 0)
        throw HexError("odd-length hex string: " + std::string(hex));
    Bytes out;
    out.reserve(s.size() / 2);
    for (size_t i = 0; i < s.size(); i += 2)
    {
        int hi = hex_value(s[i]);
        int lo = hex_value(s[i + 1]);
        if (hi < 0 || lo < 0)
            throw HexError("invalid hex digit in: " + std::string(hex));
        out.push_back(static_cast<uint8_t>(hi << 4 | lo));
    }
    return out;
}

Address address_from_hex(std::string_view hex)
{
    auto b = from_hex(hex);
    if (b.size() != 20)
        throw HexError("address must be 20 bytes, got " + std::to_string(b.size()) + ": " +
                       std::string(hex));
    Address a;
    std::copy(b.begin(), b.end(), a.bytes.begin());
    return a;
}

Word word_from_hex(std::string_view hex)
{
    auto s = strip_0x(hex);
    if (s.empty() || s.size() > 64)
        throw HexError("word hex out of range: " + std::string(hex));
    Word w = 0;
    for (char c : s)
    {
        int v = hex_value(c);
        if (v < 0)
            throw HexError("invalid hex digit in: " + std::string(hex));
        w = (w << 4) | v;
    }
    return w;
}

std::array<uint8_t, 32> to_bytes32(const Word& w)
{
    std::array<uint8_t, 32> out{};
    Word v = w;
    for (int i = 31; i >= 0; --i)
    {
        out[i] = static_cast<uint8_t>(v & 0xff);
        v >>= 8;
    }
    return out;
}

Word word_from_bytes(BytesView data)
{
    Word w = 0;
    for (uint8_t b : data.first(std::min<size_t>(data.size(), 32)))
        w = (w << 8) | b;
    return w;
}

Word word_from_address(const Address& a)
{
    return word_from_bytes(BytesView{a.bytes.data(), a.bytes.size()});
}

std::optional<Address> address_from_word(const Word& w)
{
    if (w >> 160 != 0)
        return std::nullopt;
    auto b32 = to_bytes32(w);
    Address a;
    std::copy(b32.begin() + 12, b32.end(), a.bytes.begin());
    return a;
}

bool word_is_neg(const Word& w)
{
    return (w >> 255) != 0;
}

Word word_neg(const Word& w)
{
    return ~w + 1;
}

// --- keccak-256 ---

namespace
{
constexpr uint64_t keccak_rc[24] = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL, 0x8000000080008000ULL,
    0x000000000000808bULL, 0x0000000080000001ULL, 0x8000000080008081ULL, 0x8000000000008009ULL,
    0x000000000000008aULL, 0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL, 0x8000000000008003ULL,
    0x8000000000008002ULL, 0x8000000000000080ULL, 0x000000000000800aULL, 0x800000008000000aULL,
    0x8000000080008081ULL, 0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL};

constexpr int keccak_rot[25] = {0,  1,  62, 28, 27, 36, 44, 6,  55, 20, 3,  10, 43,
                                25, 39, 41, 45, 15, 21, 8,  18, 2,  61, 56, 14};

constexpr int keccak_pi[25] = {0,  6,  12, 18, 24, 3,  9,  10, 16, 22, 1,  7,  13,
                               19, 20, 4,  5,  11, 17, 23, 2,  8,  14, 15, 21};

inline uint64_t rotl64(uint64_t x, int n)
{
    return n == 0 ? x : (x << n) | (x >> (64 - n));
}

void keccak_f1600(uint64_t st[25])
{
    for (int round = 0; round < 24; ++round)
    {
        uint64_t bc[5];
        for (int i = 0; i < 5; ++i)
            bc[i] = st[i] ^ st[i + 5] ^ st[i + 10] ^ st[i + 15] ^ st[i + 20];
        for (int i = 0; i < 5; ++i)
        {
            uint64_t t = bc[(i + 4) % 5] ^ rotl64(bc[(i + 1) % 5], 1);
            for (int j = 0; j < 25; j += 5)
                st[j + i] ^= t;
        }

        uint64_t tmp[25];
        for (int i = 0; i < 25; ++i)
            tmp[keccak_pi[i]] = rotl64(st[i], keccak_rot[i]);

        for (int j = 0; j < 25; j += 5)
        {
            for (int i = 0; i < 5; ++i)
                st[j + i] = tmp[j + i] ^ (~tmp[j + (i + 1) % 5] & tmp[j + (i + 2) % 5]);
        }

        st[0] ^= keccak_rc[round];
    }
}
}  // namespace

std::array<uint8_t, 32> keccak256(BytesView data)
{
    constexpr size_t rate = 136;  // 1600/8 - 2*32
    uint64_t st[25] = {};
    uint8_t block[rate];

    size_t off = 0;
    while (data.size() - off >= rate)
    {
        for (size_t i = 0; i < rate / 8; ++i)
        {
            uint64_t lane = 0;
            std::memcpy(&lane, data.data() + off + i * 8, 8);
            st[i] ^= lane;  // little-endian host assumed
        }
        keccak_f1600(st);
        off += rate;
    }

    std::memset(block, 0, rate);
    std::memcpy(block, data.data() + off, data.size() - off);
    block[data.size() - off] = 0x01;  // keccak (not SHA-3) domain padding
    block[rate - 1] |= 0x80;
    for (size_t i = 0; i < rate / 8; ++i)
    {
        uint64_t lane = 0;
        std::memcpy(&lane, block + i * 8, 8);
        st[i] ^= lane;
    }
    keccak_f1600(st);

    std::array<uint8_t, 32> out;
    std::memcpy(out.data(), st, 32);
    return out;
}

Word keccak256_word(BytesView data)
{
    auto h = keccak256(data);
    return word_from_bytes(BytesView{h.data(), h.size()});
}

Address create_address(const Address& creator, uint64_t nonce)
{
    // rlp([creator, nonce]) for a 20-byte string and a small integer
    Bytes nonce_rlp;
    if (nonce == 0)
        nonce_rlp.push_back(0x80);
    else if (nonce < 0x80)
        nonce_rlp.push_back(static_cast<uint8_t>(nonce));
    else
    {
        Bytes be;
        uint64_t n = nonce;
        while (n)
        {
            be.push_back(static_cast<uint8_t>(n & 0xff));
            n >>= 8;
        }
        std::reverse(be.begin(), be.end());
        nonce_rlp.push_back(static_cast<uint8_t>(0x80 + be.size()));
        nonce_rlp.insert(nonce_rlp.end(), be.begin(), be.end());
    }

    Bytes payload;
    payload.push_back(0x94);  // 0x80 + 20
    payload.insert(payload.end(), creator.bytes.begin(), creator.bytes.end());
    payload.insert(payload.end(), nonce_rlp.begin(), nonce_rlp.end());

    Bytes rlp;
    rlp.push_back(static_cast<uint8_t>(0xc0 + payload.size()));
    rlp.insert(rlp.end(), payload.begin(), payload.end());

    auto h = keccak256(rlp);
    Address a;
    std::copy(h.begin() + 12, h.end(), a.bytes.begin());
    return a;
}

}  // namespace ape
