// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "dlbc/trainer.hpp"

#include "dlbc/rng.hpp"
#include "dlbc/serialize.hpp"
#include "dlbc/sha256.hpp"

#include <algorithm>
#include <cmath>

namespace dlbc {

namespace {

constexpr double kProbClamp = 1e-12;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double clamped_log(double p) { return std::log(std::clamp(p, kProbClamp, 1.0 - kProbClamp)); }

} // namespace

std::size_t model_dim(std::size_t d, std::uint32_t hidden_dim) {
    return hidden_dim == 0 ? d : static_cast<std::size_t>(hidden_dim) * (d + 1);
}

std::uint32_t derive_hidden(std::size_t dim, std::size_t d) {
    if (dim == d) return 0;
    if (d + 1 != 0 && dim % (d + 1) == 0 && dim / (d + 1) > 0) {
        return static_cast<std::uint32_t>(dim / (d + 1));
    }
    throw std::invalid_argument("derive_hidden: weight dim inconsistent with input dim");
}

ModelWeights init_weights(std::size_t d, std::uint32_t hidden_dim, std::uint64_t seed) {
    DetRng rng(mix64(seed, 0x1417));
    ModelWeights w;
    w.weights.resize(model_dim(d, hidden_dim));
    for (double& v : w.weights) v = 0.01 * rng.gaussian();
    return w;
}

double predict(const ModelWeights& w, std::span<const double> x) {
    std::size_t d = x.size();
    std::uint32_t h = derive_hidden(w.dim(), d);
    if (h == 0) {
        double z = 0.0;
        for (std::size_t j = 0; j < d; ++j) z += w.weights[j] * x[j];
        return sigmoid(z);
    }
    const double* w1 = w.weights.data();          // h x d, row-major
    const double* w2 = w.weights.data() + h * d;  // h
    double z = 0.0;
    for (std::uint32_t k = 0; k < h; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += w1[k * d + j] * x[j];
        z += w2[k] * std::tanh(s);
    }
    return sigmoid(z);
}

LossGrad total_loss(const ModelWeights& w, const Dataset& ds, std::span<const std::size_t> batch,
                    double lambda, const WatermarkSpec* wm, int sign) {
    if (batch.empty()) throw std::invalid_argument("total_loss: empty batch");
    const std::size_t d = ds.d;
    const std::uint32_t h = derive_hidden(w.dim(), d);

    LossGrad out;
    out.grad.assign(w.dim(), 0.0);
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    std::vector<double> act(h); // hidden activations, reused per sample
    for (std::size_t row : batch) {
        if (row >= ds.n) throw std::invalid_argument("total_loss: batch index out of range");
        const double* x = ds.inputs.data() + row * d;
        const double y = static_cast<double>(ds.labels[row]);

        double p;
        if (h == 0) {
            double z = 0.0;
            for (std::size_t j = 0; j < d; ++j) z += w.weights[j] * x[j];
            p = sigmoid(z);
            double dz = (p - y) * inv_b;
            for (std::size_t j = 0; j < d; ++j) out.grad[j] += dz * x[j];
        } else {
            const double* w1 = w.weights.data();
            const double* w2 = w.weights.data() + h * d;
            double z = 0.0;
            for (std::uint32_t k = 0; k < h; ++k) {
                double s = 0.0;
                for (std::size_t j = 0; j < d; ++j) s += w1[k * d + j] * x[j];
                act[k] = std::tanh(s);
                z += w2[k] * act[k];
            }
            p = sigmoid(z);
            double dz = (p - y) * inv_b;
            for (std::uint32_t k = 0; k < h; ++k) {
                out.grad[h * d + k] += dz * act[k];
                double dpre = dz * w2[k] * (1.0 - act[k] * act[k]);
                for (std::size_t j = 0; j < d; ++j) out.grad[k * d + j] += dpre * x[j];
            }
        }
        out.value -= inv_b * (y * clamped_log(p) + (1.0 - y) * clamped_log(1.0 - p));
    }

    if (wm != nullptr && lambda != 0.0) {
        LossGrad reg = regularizer(w, wm->wm, wm->key);
        const double scale = static_cast<double>(sign) * lambda;
        out.value += scale * reg.value;
        for (std::uint32_t idx : wm->key.indices) out.grad[idx] += scale * reg.grad[idx];
    }
    return out;
}

Hash256 checkpoint_digest(const ModelWeights& w, std::uint32_t epoch) {
    Sha256Stream s;
    Bytes model = serialize_model(w);
    s.update(ByteSpan(model.data(), model.size()));
    ByteWriter e;
    e.u64(epoch);
    s.update(ByteSpan(e.bytes().data(), e.bytes().size()));
    return s.finish();
}

std::pair<ModelWeights, Checkpoint> sgd_epoch(const ModelWeights& w, std::uint32_t epoch,
                                              const Dataset& ds, const TrainerConfig& config,
                                              const WatermarkSpec* wm, int sign) {
    ModelWeights cur = w;
    std::vector<std::size_t> order = ds.train_idx;
    DetRng rng(mix64(config.seed, epoch));
    rng.shuffle(order);

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        std::size_t len = std::min<std::size_t>(config.batch_size, order.size() - start);
        LossGrad lg = total_loss(cur, ds, std::span(order).subspan(start, len), config.lambda, wm, sign);
        if (!std::isfinite(lg.value)) throw TrainingDiverged("sgd_epoch: non-finite loss");
        for (std::size_t j = 0; j < cur.weights.size(); ++j) {
            cur.weights[j] -= config.learning_rate * lg.grad[j];
            if (!std::isfinite(cur.weights[j])) throw TrainingDiverged("sgd_epoch: non-finite weight");
        }
    }

    Checkpoint ck;
    ck.epoch = epoch;
    ck.train_loss = total_loss(cur, ds, ds.train_idx, config.lambda, wm, sign).value;
    ck.weights = cur;
    ck.digest = checkpoint_digest(cur, epoch);
    return {std::move(cur), std::move(ck)};
}

double evaluate_accuracy(const ModelWeights& w, const Dataset& ds,
                         std::span<const std::size_t> part) {
    if (part.empty()) throw std::invalid_argument("evaluate_accuracy: empty part");
    std::size_t correct = 0;
    for (std::size_t row : part) {
        double p = predict(w, std::span(ds.inputs).subspan(row * ds.d, ds.d));
        int pred = p > 0.5 ? 1 : 0; // tie at 0.5 predicts class 0
        if (pred == static_cast<int>(ds.labels[row])) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(part.size());
}

Replay replay_segment(const Checkpoint& from, const Checkpoint& to, const Dataset& ds,
                      const TrainerConfig& config, const WatermarkSpec* wm, int sign) {
    if (!(from.epoch < to.epoch)) {
        throw std::invalid_argument("replay_segment: from.epoch must precede to.epoch");
    }
    ModelWeights cur = from.weights;
    Checkpoint last;
    for (std::uint32_t e = from.epoch + 1; e <= to.epoch; ++e) {
        auto [next, ck] = sgd_epoch(cur, e, ds, config, wm, sign);
        cur = std::move(next);
        last = std::move(ck);
    }
    return last.digest == to.digest ? Replay::matched : Replay::mismatched;
}

TrainRun train_model(const Dataset& ds, const TrainerConfig& config, const WatermarkSpec* wm,
                     int sign, std::uint32_t epochs) {
    TrainRun run;
    ModelWeights cur = init_weights(ds.d, config.hidden_dim, config.seed);

    Checkpoint init;
    init.epoch = 0;
    init.weights = cur;
    init.train_loss = total_loss(cur, ds, ds.train_idx, config.lambda, wm, sign).value;
    init.digest = checkpoint_digest(cur, 0);
    run.checkpoints.push_back(std::move(init));

    for (std::uint32_t e = 1; e <= epochs; ++e) {
        auto [next, ck] = sgd_epoch(cur, e, ds, config, wm, sign);
        cur = std::move(next);

        EpochStat stat;
        stat.epoch = e;
        stat.accuracy = evaluate_accuracy(cur, ds, ds.test_idx);
        if (wm != nullptr) {
            DetectResult det = detect(cur, wm->wm, wm->key);
            stat.min_confidence =
                det.confidences.empty()
                    ? 0.0
                    : *std::min_element(det.confidences.begin(), det.confidences.end());
        }
        run.history.push_back(stat);
        run.checkpoints.push_back(std::move(ck));
    }
    return run;
}

} // namespace dlbc
