// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef DLBC_CONSENSUS_HPP
#define DLBC_CONSENSUS_HPP

#include "dlbc/chain.hpp"
#include "dlbc/mempool.hpp"
#include "dlbc/model_store.hpp"
#include "dlbc/phase.hpp"
#include "dlbc/ranking.hpp"
#include "dlbc/watermark.hpp"

#include <map>
#include <optional>

namespace dlbc {

/// Watermarking constants shared by all protocol participants.
struct WmParams {
    std::uint32_t n = 32;
    std::uint32_t m = 2;
    double lambda = 0.1;
    double threshold = kDetectThreshold;

    void validate() const;
};

/// Everything a node needs to judge blocks; pinned at genesis.
struct ProtocolParams {
    RankingParams ranking;
    NetworkStats stats;
    PhaseDurations phases;
    WmParams wm;
    double fork_threshold = 0.85;   // claimed accuracy making a block "high-accuracy"
    std::size_t max_pool_tasks = 1024;

    void validate() const;
};

/// Fixed genesis block (height 0, zero digests, empty body).
Block make_genesis();

/// Digest seeding a miner's watermark: SHA-256(prev block digest ‖ selected
/// task ‖ miner id). Every field is public, so full nodes re-derive it.
Hash256 watermark_seed(const Hash256& prev_digest, const TaskId& task, const AgentId& miner);

std::pair<WatermarkMatrix, ProjectionKey> derive_watermark(const Hash256& seed_digest,
                                                           const WmParams& wm, std::size_t dim);

/// Header signature field: SHA-256(model bytes ‖ training-data digest ‖ task
/// content bytes).
Hash256 model_signature(const ModelWeights& weights, const Hash256& data_id, const Task& task);

// --- chain view and fork choice ---------------------------------------------

struct ChainView {
    std::vector<Block> blocks; // genesis first

    std::size_t high_accuracy_count(double threshold) const;
    double cumulative_accuracy() const;
    Hash256 tip_digest() const;
};

/// Winner = most blocks with claimed accuracy >= threshold; ties fall to
/// higher cumulative accuracy, then to the earlier entry. All chains must
/// share the genesis block.
std::size_t fork_choice(const std::vector<ChainView>& chains, double threshold);

/// Redefined confirmation count: high-accuracy blocks after the given index.
std::size_t confirmations(const ChainView& chain, std::size_t block_index, double threshold);

// --- candidate validation ----------------------------------------------------

enum class ValidationFail {
    commitment,
    accuracy,
    watermark,
    ranking,
    checkpoint,
    signature,
    structure,
    link,
    missing_model,
};

const char* to_string(ValidationFail f);

/// A miner's Phase 3 submission: the proposed block plus the material full
/// nodes need to verify it.
struct Candidate {
    Block block;
    std::string model_ref;            // store run reference
    WatermarkMatrix wm;               // carried proof; must equal the derived one
    ProjectionKey key;
    std::vector<Hash256> checkpoints; // epoch-ordered digests
};

/// Shared Phase 3 view miners assemble candidates from (Assumption 3: all
/// full nodes expose the same view).
struct BlockTemplate {
    std::uint64_t height = 0;
    Hash256 prev_digest{};
    double timestamp = 0.0; // block completion time (t_next_a)
    TaskId selected;
    Task selected_record;
    std::vector<TaskId> unselected_after; // post-block queue, canonical order
    std::vector<Task> confirmed;
    std::vector<Bytes> transactions;
    CoinbaseSplit coinbase;
};

enum class CommitResult { accepted, rejected_late, duplicate_ignored };

/// Consensus state of one full node: chain, pool, commitment log, candidate
/// queue and the pending task selection for the block being mined.
class FullNode {
public:
    FullNode(ProtocolParams params, const ModelStore* store);

    const ProtocolParams& params() const { return params_; }
    const ChainView& chain() const { return chain_; }
    Mempool& pool() { return pool_; }
    const Mempool& pool() const { return pool_; }

    /// Height of the block currently being mined.
    std::uint64_t mining_height() const { return chain_.blocks.size(); }
    /// Interval bounds of the block currently being mined.
    PhaseSchedule current_schedule() const;

    SubmitResult submit_task(const Task& task, double local_now);

    /// Commitments accepted strictly before t_c on this node's clock;
    /// the first (miner, task) entry wins.
    CommitResult record_commitment(const ModelCommitment& c, double local_now);
    bool has_commitment(const AgentId& miner, const TaskId& task) const;

    void add_candidate(Candidate c) { candidates_.push_back(std::move(c)); }
    std::size_t candidate_count() const { return candidates_.size(); }

    /// Task being mined now, if any.
    std::optional<TaskId> pending_task() const { return pending_; }
    const Task* pending_task_record() const { return pending_ ? &pending_record_ : nullptr; }
    std::uint64_t pending_queue_len() const { return pending_queue_len_; }

    /// Phase 3 assembly view for the current block; requires a pending task.
    BlockTemplate block_template() const;

    /// Full clause check; nullopt means valid.
    std::optional<ValidationFail> validate_candidate(const Candidate& cand) const;

    struct AcceptOutcome {
        Block block;
        bool idle = false;
        std::vector<std::pair<AgentId, ValidationFail>> rejections;
    };

    /// End-of-interval acceptance: candidates ordered by claimed accuracy,
    /// first valid one wins, idle block otherwise. Applies the block to the
    /// pool and recomputes the next task selection.
    AcceptOutcome accept_block();

    /// Applies a block accepted elsewhere (mirror nodes in the simulator).
    void apply_external_block(const Block& block);

    const Dataset& dataset_for(const Task& task) const;

private:
    void select_next_task();
    Block build_idle_block();

    ProtocolParams params_;
    Mempool pool_;
    ChainView chain_;
    const ModelStore* store_;

    std::map<std::pair<AgentId, TaskId>, ModelCommitment> commitments_;
    std::vector<Candidate> candidates_;

    std::optional<TaskId> pending_;
    Task pending_record_;
    std::uint64_t pending_queue_len_ = 0;

    mutable std::map<TaskId, Dataset> dataset_cache_;
};

// --- full-chain revalidation -------------------------------------------------

struct ValidateReport {
    bool ok = true;
    std::uint64_t height = 0;
    ValidationFail reason = ValidationFail::structure;
    std::string detail;
};

/// Replays the whole chain from genesis: digest links, task lifecycle and
/// selection argmin, coinbase splits, commitments, signatures, accuracy
/// re-evaluation, watermark detection and a seeded checkpoint spot-replay.
/// Stops at the first failure.
ValidateReport validate_chain(const ChainView& chain, const ModelStore& store,
                              const ProtocolParams& params);

} // namespace dlbc

#endif // DLBC_CONSENSUS_HPP
