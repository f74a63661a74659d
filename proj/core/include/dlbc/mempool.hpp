// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef DLBC_MEMPOOL_HPP
#define DLBC_MEMPOOL_HPP

#include "dlbc/chain.hpp"
#include "dlbc/phase.hpp"
#include "dlbc/ranking.hpp"

#include <map>
#include <set>

namespace dlbc {

struct MempoolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SubmitResult { ack, reject_duplicate, reject_invalid, reject_phase, reject_overflow };

/// Full-node memory pool augmented with the unconfirmed / unselected task
/// lists. Every acked task lives in exactly one of {unconfirmed, unselected,
/// selected-by-some-accepted-block}.
class Mempool {
public:
    explicit Mempool(std::size_t max_tasks = 1024) : max_tasks_(max_tasks) {}

    /// Accepts a well-formed new task during Phases 1 and 2; the in-flight
    /// task set freezes at Phase 3 start.
    SubmitResult submit_task(const Task& task, double now, Phase phase);

    /// Applies an accepted block: confirmed tasks move unconfirmed ->
    /// unselected, the block's selected task leaves the queue.
    /// Throws MempoolError if the block references tasks this pool never saw.
    void confirm_tasks(const Block& block);

    /// Canonical queue ordering (score asc, reward desc, id asc); identical
    /// on every node holding the same pool.
    std::vector<ScoredTask> snapshot(const RankingParams& params, const NetworkStats& stats) const;

    std::vector<Task> unselected_tasks() const;
    std::vector<Task> unconfirmed_tasks() const;
    const Task* find_unselected(const TaskId& id) const;

    void add_transaction(Bytes tx) { transactions_.push_back(std::move(tx)); }
    const std::vector<Bytes>& peek_transactions() const { return transactions_; }
    std::vector<Bytes> take_transactions();
    /// Removes and returns the first `count` queued transactions.
    std::vector<Bytes> take_transactions(std::size_t count);

    std::size_t unconfirmed_count() const { return unconfirmed_.size(); }
    std::size_t unselected_count() const { return unselected_.size(); }
    bool known(const TaskId& id) const;

    /// Digest over the full pool contents, used to assert that simulated
    /// full nodes hold byte-identical views.
    Hash256 digest() const;

private:
    std::map<TaskId, Task> unconfirmed_;
    std::map<TaskId, Task> unselected_;
    std::set<TaskId> selected_;
    std::vector<Bytes> transactions_;
    std::size_t max_tasks_;
};

} // namespace dlbc

#endif // DLBC_MEMPOOL_HPP
