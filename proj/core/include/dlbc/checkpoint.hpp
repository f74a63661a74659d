// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef DLBC_CHECKPOINT_HPP
#define DLBC_CHECKPOINT_HPP

#include "dlbc/chain.hpp"

namespace dlbc {

/// Saved training state proving work between epochs;
/// digest = SHA-256(serialize(weights) ‖ epoch).
struct Checkpoint {
    std::uint32_t epoch = 0;
    ModelWeights weights;
    double train_loss = 0.0;
    Hash256 digest{};
};

Hash256 checkpoint_digest(const ModelWeights& w, std::uint32_t epoch);

} // namespace dlbc

#endif // DLBC_CHECKPOINT_HPP
