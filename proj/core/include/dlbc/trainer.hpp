// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef DLBC_TRAINER_HPP
#define DLBC_TRAINER_HPP

#include "dlbc/chain.hpp"
#include "dlbc/checkpoint.hpp"
#include "dlbc/dataset.hpp"
#include "dlbc/watermark.hpp"

#include <span>

namespace dlbc {

struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Deterministic SGD hyperparameters. hidden_dim 0 selects plain logistic
/// regression; otherwise a 1-hidden-layer tanh network. Neither family uses
/// bias terms — class clusters are origin-symmetric by construction.
struct TrainerConfig {
    double learning_rate = 1.0;
    std::uint32_t epochs_budget = 20;
    double lambda = 0.0;          // regularizer weight
    std::uint32_t batch_size = 1;
    std::uint64_t seed = 0;
    std::uint32_t hidden_dim = 0;

    void validate() const {
        if (!(learning_rate > 0.0)) throw std::invalid_argument("trainer: learning_rate must be > 0");
        if (epochs_budget == 0) throw std::invalid_argument("trainer: epochs_budget must be > 0");
        if (batch_size == 0) throw std::invalid_argument("trainer: batch_size must be > 0");
        if (lambda < 0.0) throw std::invalid_argument("trainer: lambda must be >= 0");
    }
};

/// Watermark carrier bound into the loss when training under consensus.
struct WatermarkSpec {
    WatermarkMatrix wm;
    ProjectionKey key;
};

std::size_t model_dim(std::size_t d, std::uint32_t hidden_dim);

/// Recovers the hidden width from weight and input dimensions (dim == d is
/// logistic regression, dim == h*(d+1) the tanh network). Throws on mismatch.
std::uint32_t derive_hidden(std::size_t dim, std::size_t d);

/// Small Gaussian init, deterministic in the seed.
ModelWeights init_weights(std::size_t d, std::uint32_t hidden_dim, std::uint64_t seed);

/// Class-1 probability for one sample.
double predict(const ModelWeights& w, std::span<const double> x);

/// Mean binary cross-entropy over the batch plus sign * lambda * E_R, with
/// the exact analytic gradient of the whole expression. Passing wm == nullptr
/// or lambda == 0 reduces to the plain classifier loss.
LossGrad total_loss(const ModelWeights& w, const Dataset& ds, std::span<const std::size_t> batch,
                    double lambda, const WatermarkSpec* wm, int sign);

/// One full pass of seeded mini-batch SGD; batch order derives from
/// (config.seed, epoch). Throws TrainingDiverged on non-finite loss.
std::pair<ModelWeights, Checkpoint> sgd_epoch(const ModelWeights& w, std::uint32_t epoch,
                                              const Dataset& ds, const TrainerConfig& config,
                                              const WatermarkSpec* wm, int sign);

/// Fraction of correct predictions at the 0.5 threshold over the given rows;
/// a tie at 0.5 predicts class 0. Throws on an empty part.
double evaluate_accuracy(const ModelWeights& w, const Dataset& ds,
                         std::span<const std::size_t> part);

enum class Replay { matched, mismatched };

/// Re-runs deterministic SGD from `from` and compares the resulting digest
/// with `to`; equality replaces any tolerance check.
Replay replay_segment(const Checkpoint& from, const Checkpoint& to, const Dataset& ds,
                      const TrainerConfig& config, const WatermarkSpec* wm, int sign = 1);

struct TrainRun {
    std::vector<Checkpoint> checkpoints; // epoch 0 (init) .. epochs
    std::vector<EpochStat> history;
};

/// Full training drive: init from config.seed, run `epochs` passes, record
/// every checkpoint. Watermark detection stats land in the history when a
/// watermark is supplied.
TrainRun train_model(const Dataset& ds, const TrainerConfig& config, const WatermarkSpec* wm,
                     int sign, std::uint32_t epochs);

} // namespace dlbc

#endif // DLBC_TRAINER_HPP
