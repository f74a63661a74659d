// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef DLBC_STREAM_CIPHER_HPP
#define DLBC_STREAM_CIPHER_HPP

#include "dlbc/bytes.hpp"
#include "dlbc/serialize.hpp"
#include "dlbc/sha256.hpp"

namespace dlbc {

/// 32-byte symmetric key released by the publisher at the end of Phase 3.
using StreamKey = Hash256;

/// XOR stream cipher with a counter-based keystream: block i of the stream is
/// SHA-256(key ‖ i). Applying it twice restores the plaintext; data stays
/// unreadable until the key release.
inline Bytes xor_keystream(const StreamKey& key, ByteSpan data) {
    Bytes out(data.begin(), data.end());
    std::uint64_t counter = 0;
    std::size_t pos = 0;
    while (pos < out.size()) {
        Sha256Stream s;
        s.update(key);
        ByteWriter ctr;
        ctr.u64(counter++);
        s.update(ByteSpan(ctr.bytes().data(), ctr.bytes().size()));
        Hash256 block = s.finish();
        std::size_t len = std::min<std::size_t>(block.size(), out.size() - pos);
        for (std::size_t i = 0; i < len; ++i) out[pos + i] ^= block[i];
        pos += len;
    }
    return out;
}

} // namespace dlbc

#endif // DLBC_STREAM_CIPHER_HPP
