// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "dlbc/consensus.hpp"

#include "dlbc/links.hpp"
#include "dlbc/rng.hpp"
#include "dlbc/sha256.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dlbc {

void WmParams::validate() const {
    if (n == 0 || n > 256) throw std::invalid_argument("wm: n must be in 1..256");
    if (m < 2) throw std::invalid_argument("wm: m must be >= 2");
    if (lambda < 0.0) throw std::invalid_argument("wm: lambda must be >= 0");
    if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("wm: bad threshold");
}

void ProtocolParams::validate() const {
    ranking.validate();
    stats.validate();
    phases.validate();
    wm.validate();
    if (!(fork_threshold > 0.0 && fork_threshold <= 1.0)) {
        throw std::invalid_argument("protocol: bad fork threshold");
    }
}

Block make_genesis() {
    Block b;
    b.header.height = 0;
    b.header.timestamp = 0.0;
    b.header.model_link = "";
    b.coinbase = CoinbaseSplit{0.0, 1.0};
    b.header.data_digest = body_digest(b);
    return b;
}

Hash256 watermark_seed(const Hash256& prev_digest, const TaskId& task, const AgentId& miner) {
    Sha256Stream s;
    s.update(prev_digest);
    s.update(task.bytes);
    s.update(miner.bytes);
    return s.finish();
}

std::pair<WatermarkMatrix, ProjectionKey> derive_watermark(const Hash256& seed_digest,
                                                           const WmParams& wm, std::size_t dim) {
    return {watermark_from_block(seed_digest, wm.n, wm.m),
            projection_from_block(seed_digest, dim, wm.n)};
}

Hash256 model_signature(const ModelWeights& weights, const Hash256& data_id, const Task& task) {
    Sha256Stream s;
    Bytes model = serialize_model(weights);
    s.update(ByteSpan(model.data(), model.size()));
    s.update(data_id);
    Bytes info = task_content_bytes(task);
    s.update(ByteSpan(info.data(), info.size()));
    return s.finish();
}

// --- chain view ---------------------------------------------------------------

std::size_t ChainView::high_accuracy_count(double threshold) const {
    std::size_t count = 0;
    for (const Block& b : blocks) {
        if (!b.header.is_idle() && b.header.claimed_accuracy >= threshold) ++count;
    }
    return count;
}

double ChainView::cumulative_accuracy() const {
    double sum = 0.0;
    for (const Block& b : blocks) {
        if (!b.header.is_idle()) sum += b.header.claimed_accuracy;
    }
    return sum;
}

Hash256 ChainView::tip_digest() const {
    if (blocks.empty()) return kZeroHash;
    return block_digest(blocks.back().header);
}

std::size_t fork_choice(const std::vector<ChainView>& chains, double threshold) {
    if (chains.empty()) throw std::invalid_argument("fork_choice: no chains");
    Hash256 genesis = block_digest(chains.front().blocks.at(0).header);
    for (const ChainView& c : chains) {
        if (block_digest(c.blocks.at(0).header) != genesis) {
            throw std::invalid_argument("fork_choice: chains do not share genesis");
        }
    }
    std::size_t best = 0;
    std::size_t best_count = chains[0].high_accuracy_count(threshold);
    double best_cum = chains[0].cumulative_accuracy();
    for (std::size_t i = 1; i < chains.size(); ++i) {
        std::size_t count = chains[i].high_accuracy_count(threshold);
        double cum = chains[i].cumulative_accuracy();
        if (count > best_count || (count == best_count && cum > best_cum)) {
            best = i;
            best_count = count;
            best_cum = cum;
        }
    }
    return best;
}

std::size_t confirmations(const ChainView& chain, std::size_t block_index, double threshold) {
    if (block_index >= chain.blocks.size()) throw std::out_of_range("confirmations: bad index");
    std::size_t count = 0;
    for (std::size_t i = block_index + 1; i < chain.blocks.size(); ++i) {
        const Block& b = chain.blocks[i];
        if (!b.header.is_idle() && b.header.claimed_accuracy >= threshold) ++count;
    }
    return count;
}

const char* to_string(ValidationFail f) {
    switch (f) {
        case ValidationFail::commitment: return "commitment";
        case ValidationFail::accuracy: return "accuracy";
        case ValidationFail::watermark: return "watermark";
        case ValidationFail::ranking: return "ranking";
        case ValidationFail::checkpoint: return "checkpoint";
        case ValidationFail::signature: return "signature";
        case ValidationFail::structure: return "structure";
        case ValidationFail::link: return "link";
        case ValidationFail::missing_model: return "missing_model";
    }
    return "unknown";
}

// --- full node -----------------------------------------------------------------

FullNode::FullNode(ProtocolParams params, const ModelStore* store)
    : params_(std::move(params)), pool_(params_.max_pool_tasks), store_(store) {
    params_.validate();
    chain_.blocks.push_back(make_genesis());
    select_next_task();
}

PhaseSchedule FullNode::current_schedule() const {
    double start = static_cast<double>(mining_height() - 1) * params_.phases.interval();
    return PhaseSchedule::at(start, params_.phases);
}

namespace {

/// Lenient phase judgment for skewed local clocks: times before the interval
/// count as P1, times at or beyond t_c count as P3.
Phase judge_phase(double local_now, const PhaseSchedule& s) {
    if (local_now < s.t_b) return Phase::p1;
    if (local_now < s.t_c) return Phase::p2;
    return Phase::p3;
}

} // namespace

SubmitResult FullNode::submit_task(const Task& task, double local_now) {
    return pool_.submit_task(task, local_now, judge_phase(local_now, current_schedule()));
}

CommitResult FullNode::record_commitment(const ModelCommitment& c, double local_now) {
    if (!(local_now < current_schedule().t_c)) return CommitResult::rejected_late;
    auto key = std::make_pair(c.miner_id, c.task);
    if (commitments_.contains(key)) return CommitResult::duplicate_ignored;
    commitments_.emplace(key, c);
    return CommitResult::accepted;
}

bool FullNode::has_commitment(const AgentId& miner, const TaskId& task) const {
    return commitments_.contains(std::make_pair(miner, task));
}

const Dataset& FullNode::dataset_for(const Task& task) const {
    TaskId id = task_id(task);
    auto it = dataset_cache_.find(id);
    if (it == dataset_cache_.end()) {
        it = dataset_cache_.emplace(id, dataset_from_link(task.data_link)).first;
    }
    return it->second;
}

BlockTemplate FullNode::block_template() const {
    if (!pending_) throw std::logic_error("block_template: no pending task");
    BlockTemplate t;
    t.height = mining_height();
    t.prev_digest = block_digest(chain_.blocks.back().header);
    t.timestamp = current_schedule().t_next_a;
    t.selected = *pending_;
    t.selected_record = pending_record_;
    t.confirmed = pool_.unconfirmed_tasks();
    t.transactions = pool_.peek_transactions();
    t.coinbase = reward_split(params_.ranking, pending_queue_len_);

    // Post-block queue: current unselected minus the mined task plus the
    // tasks this block confirms, in canonical score order.
    std::vector<Task> post;
    for (const Task& task : pool_.unselected_tasks()) {
        if (task_id(task) != *pending_) post.push_back(task);
    }
    for (const Task& task : t.confirmed) post.push_back(task);
    for (const ScoredTask& s : rank_tasks(post, params_.ranking, params_.stats)) {
        t.unselected_after.push_back(s.task);
    }
    return t;
}

std::optional<ValidationFail> FullNode::validate_candidate(const Candidate& cand) const {
    const BlockHeader& h = cand.block.header;

    // Prerequisites: resolve the model link into the store.
    std::string ref;
    std::uint64_t trainer_seed = 0;
    try {
        std::tie(ref, trainer_seed) = parse_model_link(h.model_link);
    } catch (const StoreError&) {
        return ValidationFail::link;
    }
    if (ref != cand.model_ref) return ValidationFail::link;
    if (store_ == nullptr || !store_->has_run(ref)) return ValidationFail::missing_model;
    ModelWeights weights;
    try {
        weights = store_->load_final(ref);
    } catch (const std::exception&) {
        return ValidationFail::missing_model;
    }

    if (!pending_) return ValidationFail::ranking;
    const Task& task = pending_record_;

    // (a) commitment recorded in window, digest bound to these exact weights.
    if (!cand.block.winner_commitment) return ValidationFail::commitment;
    auto it = commitments_.find(std::make_pair(h.winner_id, h.selected_task));
    if (it == commitments_.end()) return ValidationFail::commitment;
    ModelCommitment expect = model_commitment(weights, h.winner_id, h.selected_task);
    if (it->second.digest != expect.digest) return ValidationFail::commitment;
    if (cand.block.winner_commitment->digest != expect.digest) return ValidationFail::commitment;

    // (b) deterministic evaluation makes the accuracy claim an equality check.
    const Dataset& ds = dataset_for(task);
    double measured = evaluate_accuracy(weights, ds, ds.test_idx);
    if (measured != h.claimed_accuracy) return ValidationFail::accuracy;

    // (c) watermark derived from public block data must be present.
    try {
        auto [wm, key] = derive_watermark(watermark_seed(h.prev_digest, h.selected_task, h.winner_id),
                                          params_.wm, weights.dim());
        if (cand.wm.bits != wm.bits || cand.wm.m != wm.m || cand.key.indices != key.indices) {
            return ValidationFail::watermark;
        }
        if (!detect(weights, wm, key, params_.wm.threshold).matched) {
            return ValidationFail::watermark;
        }
    } catch (const std::invalid_argument&) {
        return ValidationFail::watermark;
    }

    BlockTemplate tmpl = block_template();

    // (d) the mined task must be the queue argmin and the recorded queue the
    // canonical post-block snapshot.
    if (h.selected_task != tmpl.selected) return ValidationFail::ranking;
    if (h.unselected_tasks != tmpl.unselected_after) return ValidationFail::ranking;

    // (e) checkpoint trail spot-check: one seeded adjacent pair replays bit-exactly.
    try {
        std::vector<Hash256> digests = store_->checkpoint_digests(ref);
        if (digests.size() < 2 || cand.checkpoints != digests) return ValidationFail::checkpoint;
        Hash256 hd = block_digest(h);
        std::uint64_t pick = 0;
        for (int i = 0; i < 8; ++i) pick |= static_cast<std::uint64_t>(hd[i]) << (8 * i);
        std::size_t pair_idx = static_cast<std::size_t>(pick % (digests.size() - 1));
        Checkpoint from = store_->load_checkpoint(ref, digests[pair_idx]);
        Checkpoint to = store_->load_checkpoint(ref, digests[pair_idx + 1]);
        TrainerConfig cfg = config_from_link(task.model_link, trainer_seed, params_.wm.lambda);
        auto [wm, key] = derive_watermark(watermark_seed(h.prev_digest, h.selected_task, h.winner_id),
                                          params_.wm, weights.dim());
        WatermarkSpec spec{wm, key};
        if (replay_segment(from, to, ds, cfg, &spec) != Replay::matched) {
            return ValidationFail::checkpoint;
        }
    } catch (const std::exception&) {
        return ValidationFail::checkpoint;
    }

    // Model signature binds model bytes, data identity and task info.
    if (model_signature(weights, dataset_digest(ds), task) != h.model_signature) {
        return ValidationFail::signature;
    }

    // (f) structural agreement with the shared Phase 3 view.
    try {
        if (h.height != tmpl.height) return ValidationFail::structure;
        if (h.prev_digest != tmpl.prev_digest) return ValidationFail::structure;
        if (h.timestamp != tmpl.timestamp) return ValidationFail::structure;
        if (!(h.claimed_accuracy >= 0.0 && h.claimed_accuracy <= 1.0)) return ValidationFail::structure;
        if (cand.block.coinbase != tmpl.coinbase) return ValidationFail::structure;
        if (cand.block.transactions != tmpl.transactions) return ValidationFail::structure;
        if (cand.block.confirmed_tasks.size() != tmpl.confirmed.size()) return ValidationFail::structure;
        for (std::size_t i = 0; i < tmpl.confirmed.size(); ++i) {
            if (task_id(cand.block.confirmed_tasks[i]) != task_id(tmpl.confirmed[i])) {
                return ValidationFail::structure;
            }
        }
        if (h.data_digest != body_digest(cand.block)) return ValidationFail::structure;
        block_digest(h); // header invariants
    } catch (const SerializeError&) {
        return ValidationFail::structure;
    }
    return std::nullopt;
}

Block FullNode::build_idle_block() {
    // No winner: the pending task carries over, but submitted tasks still
    // confirm so the queue keeps making progress.
    Block b;
    b.header.height = mining_height();
    b.header.prev_digest = block_digest(chain_.blocks.back().header);
    b.header.timestamp = current_schedule().t_next_a;
    b.header.claimed_accuracy = 0.0;
    b.transactions = pool_.take_transactions();
    b.confirmed_tasks = pool_.unconfirmed_tasks();
    b.coinbase = CoinbaseSplit{0.0, 1.0};

    std::vector<Task> post = pool_.unselected_tasks();
    for (const Task& t : b.confirmed_tasks) post.push_back(t);
    for (const ScoredTask& s : rank_tasks(post, params_.ranking, params_.stats)) {
        b.header.unselected_tasks.push_back(s.task);
    }
    b.header.data_digest = body_digest(b);
    return b;
}

FullNode::AcceptOutcome FullNode::accept_block() {
    AcceptOutcome out;

    std::vector<std::size_t> order(candidates_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
        double aa = candidates_[a].block.header.claimed_accuracy;
        double ab = candidates_[b].block.header.claimed_accuracy;
        if (aa != ab) return aa > ab;
        return block_digest(candidates_[a].block.header) < block_digest(candidates_[b].block.header);
    });

    std::optional<std::size_t> winner;
    for (std::size_t idx : order) {
        std::optional<ValidationFail> fail = validate_candidate(candidates_[idx]);
        if (!fail) {
            winner = idx;
            break;
        }
        out.rejections.emplace_back(candidates_[idx].block.header.winner_id, *fail);
    }

    if (winner) {
        out.block = candidates_[*winner].block;
        pool_.take_transactions(out.block.transactions.size());
        chain_.blocks.push_back(out.block);
        pool_.confirm_tasks(out.block);
    } else {
        out.block = build_idle_block();
        out.idle = true;
        chain_.blocks.push_back(out.block);
        pool_.confirm_tasks(out.block); // no-op task-wise; keeps one code path
    }

    commitments_.clear();
    candidates_.clear();
    select_next_task();
    return out;
}

void FullNode::select_next_task() {
    std::vector<ScoredTask> snap = pool_.snapshot(params_.ranking, params_.stats);
    if (snap.empty()) {
        pending_.reset();
        pending_record_ = Task{};
        pending_queue_len_ = 0;
        return;
    }
    pending_ = snap.front().task;
    pending_record_ = *pool_.find_unselected(snap.front().task);
    pending_queue_len_ = pool_.unselected_count();
}

// --- full-chain revalidation -----------------------------------------------------

namespace {

ValidateReport fail_at(std::uint64_t height, ValidationFail reason, std::string detail) {
    return ValidateReport{false, height, reason, std::move(detail)};
}

} // namespace

ValidateReport validate_chain(const ChainView& chain, const ModelStore& store,
                              const ProtocolParams& params) {
    params.validate();
    if (chain.blocks.empty()) return fail_at(0, ValidationFail::link, "empty chain");

    Block genesis = make_genesis();
    if (block_digest(chain.blocks[0].header) != block_digest(genesis.header)) {
        return fail_at(0, ValidationFail::link, "genesis mismatch");
    }

    Mempool pool(params.max_pool_tasks);
    const double interval = params.phases.interval();

    for (std::size_t h = 1; h < chain.blocks.size(); ++h) {
        const Block& b = chain.blocks[h];
        const BlockHeader& hdr = b.header;

        // Digest chaining.
        Hash256 prev;
        try {
            prev = block_digest(chain.blocks[h - 1].header);
        } catch (const SerializeError& e) {
            return fail_at(h - 1, ValidationFail::structure, e.what());
        }
        if (hdr.height != h) return fail_at(h, ValidationFail::link, "height out of sequence");
        if (hdr.prev_digest != prev) return fail_at(h, ValidationFail::link, "broken prev link");

        try {
            if (hdr.data_digest != body_digest(b)) {
                return fail_at(h, ValidationFail::structure, "body digest mismatch");
            }
            block_digest(hdr);
        } catch (const SerializeError& e) {
            return fail_at(h, ValidationFail::structure, e.what());
        }

        std::optional<TaskId> expected = select_task(pool.unselected_tasks(), params.ranking,
                                                     params.stats);
        std::uint64_t l = pool.unselected_count();

        if (hdr.is_idle()) {
            if (hdr.selected_task.bytes != kZeroHash) {
                return fail_at(h, ValidationFail::ranking, "idle block selects a task");
            }
            if (b.coinbase != CoinbaseSplit{0.0, 1.0}) {
                return fail_at(h, ValidationFail::structure, "idle block coinbase");
            }
            if (hdr.claimed_accuracy != 0.0 || b.winner_commitment) {
                return fail_at(h, ValidationFail::structure, "idle block carries winner data");
            }
        } else {
            // Task selection replays Eqs. 1-4 against the previous block's queue.
            if (!expected || hdr.selected_task != *expected) {
                return fail_at(h, ValidationFail::ranking, "selected task is not the queue argmin");
            }
            if (b.coinbase != reward_split(params.ranking, l)) {
                return fail_at(h, ValidationFail::structure, "coinbase split mismatch");
            }

            // Commitment recorded before the training deadline.
            if (!b.winner_commitment) return fail_at(h, ValidationFail::commitment, "no commitment");
            const ModelCommitment& commit = *b.winner_commitment;
            if (commit.miner_id != hdr.winner_id || commit.task != hdr.selected_task) {
                return fail_at(h, ValidationFail::commitment, "commitment identity mismatch");
            }
            double t_c = static_cast<double>(h - 1) * interval + params.phases.p1 + params.phases.p2;
            if (!(commit.commit_time < t_c)) {
                return fail_at(h, ValidationFail::commitment, "commitment after deadline");
            }

            const Task* selected_record = pool.find_unselected(hdr.selected_task);
            if (selected_record == nullptr) {
                return fail_at(h, ValidationFail::ranking, "selected task not in queue");
            }
            Task task = *selected_record;

            std::string ref;
            std::uint64_t trainer_seed = 0;
            try {
                std::tie(ref, trainer_seed) = parse_model_link(hdr.model_link);
            } catch (const StoreError& e) {
                return fail_at(h, ValidationFail::link, e.what());
            }
            if (!store.has_run(ref)) return fail_at(h, ValidationFail::missing_model, ref);

            ModelWeights weights;
            std::vector<Hash256> digests;
            try {
                digests = store.checkpoint_digests(ref);
                // Every checkpoint file must hash to its recorded digest, so a
                // single flipped byte anywhere in the trail is caught here.
                for (const Hash256& d : digests) {
                    Checkpoint ck = store.load_checkpoint(ref, d);
                    if (checkpoint_digest(ck.weights, ck.epoch) != d || ck.digest != d) {
                        return fail_at(h, ValidationFail::checkpoint, "checkpoint digest mismatch");
                    }
                }
                weights = store.load_final(ref);
                Bytes final_bytes = serialize_model(weights);
                if (to_hex(sha256(ByteSpan(final_bytes.data(), final_bytes.size()))) != ref) {
                    return fail_at(h, ValidationFail::checkpoint, "final weights do not match ref");
                }
            } catch (const std::exception& e) {
                return fail_at(h, ValidationFail::checkpoint, e.what());
            }

            if (model_commitment(weights, commit.miner_id, commit.task).digest != commit.digest) {
                return fail_at(h, ValidationFail::commitment, "commitment digest mismatch");
            }

            Dataset ds;
            try {
                ds = dataset_from_link(task.data_link);
            } catch (const std::exception& e) {
                return fail_at(h, ValidationFail::link, e.what());
            }

            if (model_signature(weights, dataset_digest(ds), task) != hdr.model_signature) {
                return fail_at(h, ValidationFail::signature, "model signature mismatch");
            }

            double measured = evaluate_accuracy(weights, ds, ds.test_idx);
            if (measured != hdr.claimed_accuracy) {
                return fail_at(h, ValidationFail::accuracy, "claimed accuracy mismatch");
            }

            try {
                auto [wm, key] = derive_watermark(
                    watermark_seed(hdr.prev_digest, hdr.selected_task, hdr.winner_id), params.wm,
                    weights.dim());
                if (!detect(weights, wm, key, params.wm.threshold).matched) {
                    return fail_at(h, ValidationFail::watermark, "watermark below threshold");
                }

                // Seeded spot-replay of one adjacent checkpoint pair.
                Hash256 hd = block_digest(hdr);
                std::uint64_t pick = 0;
                for (int i = 0; i < 8; ++i) pick |= static_cast<std::uint64_t>(hd[i]) << (8 * i);
                std::size_t pair_idx = static_cast<std::size_t>(pick % (digests.size() - 1));
                Checkpoint from = store.load_checkpoint(ref, digests[pair_idx]);
                Checkpoint to = store.load_checkpoint(ref, digests[pair_idx + 1]);
                TrainerConfig cfg = config_from_link(task.model_link, trainer_seed, params.wm.lambda);
                WatermarkSpec spec{wm, key};
                if (replay_segment(from, to, ds, cfg, &spec) != Replay::matched) {
                    return fail_at(h, ValidationFail::checkpoint, "checkpoint replay mismatch");
                }
            } catch (const std::exception& e) {
                return fail_at(h, ValidationFail::watermark, e.what());
            }
        }

        // Task lifecycle replay: confirmations enter the pool exactly as the
        // original gossip did.
        for (const Task& t : b.confirmed_tasks) {
            if (pool.submit_task(t, t.submit_time, Phase::p1) != SubmitResult::ack) {
                return fail_at(h, ValidationFail::structure, "confirmed task rejected on replay");
            }
        }
        try {
            pool.confirm_tasks(b);
        } catch (const MempoolError& e) {
            return fail_at(h, ValidationFail::structure, e.what());
        }

        std::vector<TaskId> expect_queue;
        for (const ScoredTask& s : pool.snapshot(params.ranking, params.stats)) {
            expect_queue.push_back(s.task);
        }
        if (hdr.unselected_tasks != expect_queue) {
            return fail_at(h, ValidationFail::ranking, "recorded queue mismatch");
        }
    }
    return ValidateReport{};
}

} // namespace dlbc
