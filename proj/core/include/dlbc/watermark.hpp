// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef DLBC_WATERMARK_HPP
#define DLBC_WATERMARK_HPP

#include "dlbc/bytes.hpp"
#include "dlbc/chain.hpp"
#include "dlbc/checkpoint.hpp"

#include <cstdint>
#include <vector>

namespace dlbc {

struct Dataset;
struct TrainerConfig;

/// Default per-bit confidence every watermark element must strictly exceed.
inline constexpr double kDetectThreshold = 0.9999;

/// Loss value plus dense gradient, shared by classifier and regularizer.
struct LossGrad {
    double value = 0.0;
    std::vector<double> grad;
};

/// Binary m x n matrix with one-hot columns. Column i carries its 1 in row 0
/// when bit i of the source digest is 0 and in row 1 when it is 1; rows >= 2
/// stay zero.
struct WatermarkMatrix {
    std::vector<std::uint8_t> bits; // n digest bits, MSB-first per byte
    std::uint32_t m = 2;            // rows, >= 2

    std::size_t n() const { return bits.size(); }

    /// Materialized row-major m x n matrix.
    std::vector<std::uint8_t> matrix() const;
};

/// Recovers the bit string from a one-hot-column matrix (inverse of
/// WatermarkMatrix::matrix). Throws on malformed columns.
std::vector<std::uint8_t> matrix_to_bits(const std::vector<std::uint8_t>& matrix, std::uint32_t m,
                                         std::size_t n);

/// Which weights host which bit: n distinct indices into [0, dim), drawn by a
/// seeded Fisher-Yates selection. The seed is the first 8 bytes of the source
/// digest so any full node can re-derive the key from public block data.
struct ProjectionKey {
    std::vector<std::uint32_t> indices;
    std::uint64_t seed = 0;
};

WatermarkMatrix watermark_from_block(const Hash256& block_digest, std::size_t n, std::uint32_t m);

ProjectionKey projection_from_block(const Hash256& block_digest, std::size_t dim, std::size_t n);

/// E_R(w) = -(1/n) * sum_j [b_j ln y_j + (1-b_j) ln(1-y_j)] with
/// y_j = sigmoid(w[indices[j]]); gradient support is exactly the key indices.
LossGrad regularizer(const ModelWeights& weights, const WatermarkMatrix& wm,
                     const ProjectionKey& key);

struct DetectResult {
    std::vector<double> confidences; // per bit, in [0,1]
    bool matched = false;            // all confidences strictly above threshold
};

DetectResult detect(const ModelWeights& weights, const WatermarkMatrix& wm,
                    const ProjectionKey& key, double threshold = kDetectThreshold);

struct EpochStat {
    std::uint32_t epoch = 0;
    double min_confidence = 0.0;
    double accuracy = 0.0;
};

struct EmbedResult {
    ModelWeights weights;
    std::uint32_t epochs_used = 0;
    bool success = false;
    std::vector<EpochStat> history;      // one row per epoch run
    std::vector<Checkpoint> checkpoints; // starting weights at epoch 0, then per epoch
};

/// Trains with the regularizer added (sign +1) until detection matches or the
/// epoch budget runs out.
EmbedResult embed(ModelWeights weights, const Dataset& dataset, const TrainerConfig& config,
                  const WatermarkMatrix& wm, const ProjectionKey& key,
                  double threshold = kDetectThreshold);

/// The attack path: trains with the regularizer subtracted (sign -1) until
/// detection first fails.
EmbedResult removal_attack(ModelWeights weights, const Dataset& dataset,
                           const TrainerConfig& config, const WatermarkMatrix& wm,
                           const ProjectionKey& key, double threshold = kDetectThreshold);

} // namespace dlbc

#endif // DLBC_WATERMARK_HPP
