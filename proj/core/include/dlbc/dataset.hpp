// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef DLBC_DATASET_HPP
#define DLBC_DATASET_HPP

#include "dlbc/bytes.hpp"

#include <cstdint>
#include <vector>

namespace dlbc {

/// Synthetic binary classification set: two origin-symmetric Gaussian
/// clusters, deterministic in the seed, with a seeded 80/20 split.
struct Dataset {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> inputs;        // row-major n x d
    std::vector<std::uint8_t> labels;  // 0/1
    std::uint64_t seed = 0;
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
};

/// Cluster centers sit at ±0.05/sqrt(d) per coordinate; `noise` is the
/// per-coordinate Gaussian sigma, so noise=0 gives linearly separable data.
Dataset make_dataset(std::uint64_t seed, std::size_t n, std::size_t d, double noise);

Bytes serialize_dataset(const Dataset& ds);
Dataset deserialize_dataset(ByteSpan data);

/// Content digest used as the training-data identifier in model signatures.
Hash256 dataset_digest(const Dataset& ds);

} // namespace dlbc

#endif // DLBC_DATASET_HPP
