// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "dlbc/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dlbc {

void RankingParams::validate() const {
    if (!(k > 0.0)) throw std::invalid_argument("ranking: k must be positive");
    if (L < 2) throw std::invalid_argument("ranking: L must be at least 2");
}

void NetworkStats::validate() const {
    if (!(median_bandwidth > 0.0)) throw std::invalid_argument("ranking: bandwidth must be positive");
    if (!(median_compute > 0.0)) throw std::invalid_argument("ranking: compute must be positive");
}

double queue_index(const RankingParams& params, std::uint64_t l) {
    params.validate();
    if (l == 0) throw std::domain_error("queue_index: queue length must be positive");
    return std::log(params.k * static_cast<double>(l)) / std::log(static_cast<double>(params.L));
}

double network_difficulty(const Task& task, const NetworkStats& stats) {
    stats.validate();
    return (static_cast<double>(task.model_size) + static_cast<double>(task.data_size)) /
           stats.median_bandwidth;
}

double compute_difficulty(const Task& task, const NetworkStats& stats) {
    stats.validate();
    return task.flops / stats.median_compute;
}

double ranking_score(double d_n, double d_c, double q, double reward) {
    if (!(reward > 0.0)) throw std::domain_error("ranking_score: reward must be positive");
    if (d_c == 0.0 && q <= 0.0) throw std::domain_error("ranking_score: d_c^q undefined");
    return (d_n + std::pow(d_c, q)) / reward;
}

CoinbaseSplit reward_split(const RankingParams& params, std::uint64_t l) {
    params.validate();
    if (l == 0) throw std::domain_error("reward_split: queue length must be positive");
    double fill = params.k * static_cast<double>(l) / static_cast<double>(params.L);
    double publisher = std::max(0.0, 1.0 - fill * fill);
    return CoinbaseSplit{publisher, 1.0 - publisher};
}

namespace {

struct ScoredEntry {
    ScoredTask scored;
    std::uint64_t reward;
};

bool queue_order(const ScoredEntry& a, const ScoredEntry& b) {
    if (a.scored.score != b.scored.score) return a.scored.score < b.scored.score;
    if (a.reward != b.reward) return a.reward > b.reward;
    return a.scored.task < b.scored.task;
}

std::vector<ScoredEntry> score_all(const std::vector<Task>& tasks, const RankingParams& params,
                                   const NetworkStats& stats) {
    double q = queue_index(params, tasks.size());
    std::vector<ScoredEntry> entries;
    entries.reserve(tasks.size());
    for (const Task& t : tasks) {
        ScoredTask s;
        s.task = task_id(t);
        s.d_n = network_difficulty(t, stats);
        s.d_c = compute_difficulty(t, stats);
        s.q = q;
        s.score = ranking_score(s.d_n, s.d_c, s.q, static_cast<double>(t.reward));
        entries.push_back(ScoredEntry{s, t.reward});
    }
    std::sort(entries.begin(), entries.end(), queue_order);
    return entries;
}

} // namespace

std::vector<ScoredTask> rank_tasks(const std::vector<Task>& tasks, const RankingParams& params,
                                   const NetworkStats& stats) {
    if (tasks.empty()) return {};
    std::vector<ScoredTask> out;
    for (const ScoredEntry& e : score_all(tasks, params, stats)) out.push_back(e.scored);
    return out;
}

std::optional<TaskId> select_task(const std::vector<Task>& tasks, const RankingParams& params,
                                  const NetworkStats& stats) {
    if (tasks.empty()) return std::nullopt;
    return score_all(tasks, params, stats).front().scored.task;
}

} // namespace dlbc
