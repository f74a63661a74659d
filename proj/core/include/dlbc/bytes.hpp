// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef DLBC_BYTES_HPP
#define DLBC_BYTES_HPP

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dlbc {

using Bytes = std::vector<std::uint8_t>;
using ByteSpan = std::span<const std::uint8_t>;

/// 32-byte value used for digests and content-addressed identifiers.
using Hash256 = std::array<std::uint8_t, 32>;

/// Content-addressed identifier of a published task.
struct TaskId {
    Hash256 bytes{};
    auto operator<=>(const TaskId&) const = default;
};

/// Identifier of a protocol participant (publisher, miner or full node).
struct AgentId {
    Hash256 bytes{};
    auto operator<=>(const AgentId&) const = default;
};

inline constexpr Hash256 kZeroHash{};

inline std::string to_hex(ByteSpan data) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

inline std::string to_hex(const Hash256& h) { return to_hex(ByteSpan(h.data(), h.size())); }

inline Bytes from_hex(const std::string& hex) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (hex.size() % 2 != 0) throw std::invalid_argument("from_hex: odd length");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = nibble(hex[i]), lo = nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("from_hex: bad digit");
        out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
    }
    return out;
}

inline Hash256 hash_from_hex(const std::string& hex) {
    Bytes raw = from_hex(hex);
    if (raw.size() != 32) throw std::invalid_argument("hash_from_hex: need 64 hex digits");
    Hash256 h;
    std::copy(raw.begin(), raw.end(), h.begin());
    return h;
}

} // namespace dlbc

#endif // DLBC_BYTES_HPP
