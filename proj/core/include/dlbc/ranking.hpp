// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef DLBC_RANKING_HPP
#define DLBC_RANKING_HPP

#include "dlbc/chain.hpp"

#include <optional>
#include <vector>

namespace dlbc {

/// Protocol constants of the task-scheduling economy.
struct RankingParams {
    double k = 1.0;        // scaling factor, > 0
    std::uint64_t L = 64;  // estimated maximum queue length, >= 2

    void validate() const;
};

/// Network-wide medians used as difficulty denominators.
struct NetworkStats {
    double median_bandwidth = 1e8;  // bytes/second
    double median_compute = 1e9;    // FLOPs/second

    void validate() const;
};

struct ScoredTask {
    TaskId task;
    double d_n = 0.0;   // transmission difficulty
    double d_c = 0.0;   // compute difficulty
    double q = 0.0;     // queue index
    double score = 0.0; // (d_n + d_c^q) / reward, lower is better
};

/// Queue index q = ln(k*l) / ln(L) for current queue length l >= 1.
double queue_index(const RankingParams& params, std::uint64_t l);

/// d_n = (model_size + data_size) / median_bandwidth.
double network_difficulty(const Task& task, const NetworkStats& stats);

/// d_c = flops / median_compute.
double compute_difficulty(const Task& task, const NetworkStats& stats);

/// score = (d_n + d_c^q) / reward.
double ranking_score(double d_n, double d_c, double q, double reward);

/// Block-reward fractions: publisher gets max(0, 1 - (k*l/L)^2), miner the rest.
CoinbaseSplit reward_split(const RankingParams& params, std::uint64_t l);

/// Scores every task with l = tasks.size() and returns them ordered by
/// (score asc, reward desc, TaskId asc) — the canonical queue order every
/// node computes.
std::vector<ScoredTask> rank_tasks(const std::vector<Task>& tasks, const RankingParams& params,
                                   const NetworkStats& stats);

/// Argmin of the ranking score; ties broken by higher reward then ascending
/// TaskId bytes. Empty input yields no task (consensus emits an idle block).
std::optional<TaskId> select_task(const std::vector<Task>& tasks, const RankingParams& params,
                                  const NetworkStats& stats);

} // namespace dlbc

#endif // DLBC_RANKING_HPP
