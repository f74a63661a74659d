// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "dlbc/mempool.hpp"

#include "dlbc/sha256.hpp"

#include <algorithm>

namespace dlbc {

SubmitResult Mempool::submit_task(const Task& task, double /*now*/, Phase phase) {
    if (!task.well_formed()) return SubmitResult::reject_invalid;
    if (phase == Phase::p3) return SubmitResult::reject_phase;
    TaskId id = task_id(task);
    if (known(id)) return SubmitResult::reject_duplicate;
    if (unconfirmed_.size() + unselected_.size() >= max_tasks_) return SubmitResult::reject_overflow;
    unconfirmed_.emplace(id, task);
    return SubmitResult::ack;
}

void Mempool::confirm_tasks(const Block& block) {
    for (const Task& t : block.confirmed_tasks) {
        TaskId id = task_id(t);
        auto it = unconfirmed_.find(id);
        if (it == unconfirmed_.end()) {
            throw MempoolError("confirm_tasks: block confirms unknown task " + to_hex(id.bytes));
        }
        unselected_.insert(*it);
        unconfirmed_.erase(it);
    }
    const TaskId& sel = block.header.selected_task;
    if (sel.bytes != kZeroHash) {
        auto it = unselected_.find(sel);
        if (it == unselected_.end()) {
            throw MempoolError("confirm_tasks: selected task absent from pool");
        }
        unselected_.erase(it);
        selected_.insert(sel);
    }
}

std::vector<ScoredTask> Mempool::snapshot(const RankingParams& params,
                                          const NetworkStats& stats) const {
    return rank_tasks(unselected_tasks(), params, stats);
}

std::vector<Task> Mempool::unselected_tasks() const {
    std::vector<Task> out;
    out.reserve(unselected_.size());
    for (const auto& [id, t] : unselected_) out.push_back(t);
    return out;
}

std::vector<Task> Mempool::unconfirmed_tasks() const {
    std::vector<Task> out;
    out.reserve(unconfirmed_.size());
    for (const auto& [id, t] : unconfirmed_) out.push_back(t);
    return out;
}

const Task* Mempool::find_unselected(const TaskId& id) const {
    auto it = unselected_.find(id);
    return it == unselected_.end() ? nullptr : &it->second;
}

std::vector<Bytes> Mempool::take_transactions() {
    std::vector<Bytes> out = std::move(transactions_);
    transactions_.clear();
    return out;
}

std::vector<Bytes> Mempool::take_transactions(std::size_t count) {
    count = std::min(count, transactions_.size());
    std::vector<Bytes> out(std::make_move_iterator(transactions_.begin()),
                           std::make_move_iterator(transactions_.begin() + count));
    transactions_.erase(transactions_.begin(), transactions_.begin() + count);
    return out;
}

bool Mempool::known(const TaskId& id) const {
    return unconfirmed_.contains(id) || unselected_.contains(id) || selected_.contains(id);
}

Hash256 Mempool::digest() const {
    Sha256Stream s;
    auto feed = [&s](const std::map<TaskId, Task>& m) {
        for (const auto& [id, t] : m) {
            s.update(id.bytes);
            Bytes enc = serialize_task(t);
            s.update(ByteSpan(enc.data(), enc.size()));
        }
    };
    feed(unconfirmed_);
    feed(unselected_);
    for (const TaskId& id : selected_) s.update(id.bytes);
    for (const Bytes& tx : transactions_) s.update(ByteSpan(tx.data(), tx.size()));
    return s.finish();
}

} // namespace dlbc
