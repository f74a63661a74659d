// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef DLBC_SHA256_HPP
#define DLBC_SHA256_HPP

#include "dlbc/bytes.hpp"

namespace dlbc {

/// One-shot SHA-256 of a contiguous buffer.
Hash256 sha256(ByteSpan data);

/// Incremental SHA-256 for multi-part inputs (model bytes ‖ ids ‖ metadata).
class Sha256Stream {
public:
    Sha256Stream();
    ~Sha256Stream();
    Sha256Stream(const Sha256Stream&) = delete;
    Sha256Stream& operator=(const Sha256Stream&) = delete;

    void update(ByteSpan data);
    void update(const Hash256& h) { update(ByteSpan(h.data(), h.size())); }
    Hash256 finish();

private:
    void* ctx_;
};

} // namespace dlbc

#endif // DLBC_SHA256_HPP
