// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "dlbc/watermark.hpp"

#include "dlbc/rng.hpp"
#include "dlbc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dlbc {

namespace {

constexpr double kProbClamp = 1e-12;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace

std::vector<std::uint8_t> WatermarkMatrix::matrix() const {
    std::vector<std::uint8_t> mat(static_cast<std::size_t>(m) * bits.size(), 0);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        std::size_t row = bits[i] ? 1 : 0;
        mat[row * bits.size() + i] = 1;
    }
    return mat;
}

std::vector<std::uint8_t> matrix_to_bits(const std::vector<std::uint8_t>& matrix, std::uint32_t m,
                                         std::size_t n) {
    if (matrix.size() != static_cast<std::size_t>(m) * n) {
        throw std::invalid_argument("matrix_to_bits: size mismatch");
    }
    std::vector<std::uint8_t> bits(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t ones = 0, one_row = 0;
        for (std::uint32_t r = 0; r < m; ++r) {
            if (matrix[static_cast<std::size_t>(r) * n + i]) {
                ++ones;
                one_row = r;
            }
        }
        if (ones != 1 || one_row > 1) {
            throw std::invalid_argument("matrix_to_bits: column is not one-hot in rows {0,1}");
        }
        bits[i] = static_cast<std::uint8_t>(one_row);
    }
    return bits;
}

WatermarkMatrix watermark_from_block(const Hash256& block_digest, std::size_t n, std::uint32_t m) {
    if (n > 256) throw std::invalid_argument("watermark_from_block: at most 256 bits in a digest");
    if (n == 0) throw std::invalid_argument("watermark_from_block: need at least one bit");
    if (m < 2) throw std::invalid_argument("watermark_from_block: need at least two rows");
    WatermarkMatrix wm;
    wm.m = m;
    wm.bits.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        wm.bits[i] = (block_digest[i / 8] >> (7 - i % 8)) & 1; // MSB-first per byte
    }
    return wm;
}

ProjectionKey projection_from_block(const Hash256& block_digest, std::size_t dim, std::size_t n) {
    if (dim < n) throw std::invalid_argument("projection_from_block: dim must be >= n");
    ProjectionKey key;
    key.seed = 0;
    for (int i = 0; i < 8; ++i) key.seed |= static_cast<std::uint64_t>(block_digest[i]) << (8 * i);

    std::vector<std::uint32_t> pool(dim);
    std::iota(pool.begin(), pool.end(), 0);
    DetRng rng(key.seed);
    key.indices.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t pick = j + static_cast<std::size_t>(rng.bounded(dim - j));
        std::swap(pool[j], pool[pick]);
        key.indices[j] = pool[j];
    }
    return key;
}

LossGrad regularizer(const ModelWeights& weights, const WatermarkMatrix& wm,
                     const ProjectionKey& key) {
    const std::size_t n = wm.n();
    if (key.indices.size() != n) throw std::invalid_argument("regularizer: bits/key size mismatch");
    LossGrad out;
    out.grad.assign(weights.dim(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::uint32_t idx = key.indices[j];
        if (idx >= weights.dim()) throw std::invalid_argument("regularizer: index out of range");
        double y = sigmoid(weights.weights[idx]);
        double yc = std::clamp(y, kProbClamp, 1.0 - kProbClamp);
        double b = static_cast<double>(wm.bits[j]);
        out.value -= inv_n * (b * std::log(yc) + (1.0 - b) * std::log(1.0 - yc));
        out.grad[idx] += inv_n * (y - b);
    }
    return out;
}

DetectResult detect(const ModelWeights& weights, const WatermarkMatrix& wm,
                    const ProjectionKey& key, double threshold) {
    const std::size_t n = wm.n();
    if (key.indices.size() != n) throw std::invalid_argument("detect: bits/key size mismatch");
    DetectResult res;
    res.confidences.resize(n);
    res.matched = true;
    for (std::size_t j = 0; j < n; ++j) {
        std::uint32_t idx = key.indices[j];
        if (idx >= weights.dim()) throw std::invalid_argument("detect: index out of range");
        double y = sigmoid(weights.weights[idx]);
        double conf = wm.bits[j] ? y : 1.0 - y;
        res.confidences[j] = conf;
        if (!(conf > threshold)) res.matched = false;
    }
    return res;
}

namespace {

EmbedResult drive(ModelWeights weights, const Dataset& dataset, const TrainerConfig& config,
                  const WatermarkMatrix& wm, const ProjectionKey& key, double threshold, int sign,
                  bool stop_when_matched) {
    WatermarkSpec spec{wm, key};
    EmbedResult res;

    Checkpoint start;
    start.epoch = 0;
    start.weights = weights;
    start.train_loss = total_loss(weights, dataset, dataset.train_idx, config.lambda, &spec, sign).value;
    start.digest = checkpoint_digest(weights, 0);
    res.checkpoints.push_back(std::move(start));

    for (std::uint32_t e = 1; e <= config.epochs_budget; ++e) {
        auto [next, ck] = sgd_epoch(weights, e, dataset, config, &spec, sign);
        weights = std::move(next);
        res.checkpoints.push_back(std::move(ck));

        DetectResult det = detect(weights, wm, key, threshold);
        EpochStat stat;
        stat.epoch = e;
        stat.min_confidence = *std::min_element(det.confidences.begin(), det.confidences.end());
        stat.accuracy = evaluate_accuracy(weights, dataset, dataset.test_idx);
        res.history.push_back(stat);

        if (det.matched == stop_when_matched) {
            res.weights = std::move(weights);
            res.epochs_used = e;
            res.success = true;
            return res;
        }
    }
    res.weights = std::move(weights);
    res.epochs_used = config.epochs_budget;
    res.success = false;
    return res;
}

} // namespace

EmbedResult embed(ModelWeights weights, const Dataset& dataset, const TrainerConfig& config,
                  const WatermarkMatrix& wm, const ProjectionKey& key, double threshold) {
    return drive(std::move(weights), dataset, config, wm, key, threshold, +1, true);
}

EmbedResult removal_attack(ModelWeights weights, const Dataset& dataset,
                           const TrainerConfig& config, const WatermarkMatrix& wm,
                           const ProjectionKey& key, double threshold) {
    return drive(std::move(weights), dataset, config, wm, key, threshold, -1, false);
}

} // namespace dlbc
