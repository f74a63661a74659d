// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "dlbc/simnet.hpp"

#include "dlbc/links.hpp"
#include "dlbc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace dlbc {

double transfer_delay(double latency, double bandwidth, std::uint64_t payload_bytes) {
    return latency + static_cast<double>(payload_bytes) / bandwidth;
}

namespace {

constexpr std::uint64_t kSmallMsgBytes = 256;   // submissions, commitments, headers
constexpr std::uint64_t kCandidateBytes = 1024; // links and digests only, no model payload
constexpr double kCandidateBuildDelay = 0.5;    // accuracy evaluation after test release

struct PlannedTask {
    double submit_at = 0.0;
    Task task;
    std::size_t publisher_idx = 0;
};

struct PlannedTx {
    std::uint64_t height = 0;
    Bytes payload;
};

struct MinerState {
    const AgentSpec* spec = nullptr;
    std::size_t miner_index = 0;
    double flops_per_s = 0.0;

    // Per-task received release material.
    struct Release {
        Bytes ciphertext;
        bool have_cipher = false;
        StreamKey key{};
        bool have_key = false;
    };
    std::map<TaskId, Release> releases;

    // Current block's training product.
    std::uint64_t trained_height = 0; // 0 = nothing trained yet
    TaskId trained_task;
    std::string run_ref;
    ModelWeights final_weights;
    std::vector<Hash256> checkpoint_digests;
    ModelCommitment commitment;
    std::uint32_t epochs = 0;
    double train_time = 0.0;
    std::uint64_t trainer_seed = 0;
    Dataset dataset;

    // Thief bookkeeping.
    bool acted_this_block = false;
};

struct Control {
    enum Kind { interval_start, p3_start, accept } kind = interval_start;
    std::uint64_t height = 0;
};

struct QueueItem {
    double at = 0.0;
    std::uint64_t seq = 0;
    std::variant<SimEvent, Control> body;
};

struct QueueOrder {
    bool operator()(const QueueItem& a, const QueueItem& b) const {
        if (a.at != b.at) return a.at > b.at;
        return a.seq > b.seq;
    }
};

class Simulator {
public:
    Simulator(const ScenarioConfig& config, ModelStore& store)
        : cfg_(config), store_(store), rng_(mix64(config.seed, 0x51e7)) {
        cfg_.validate();
        for (const AgentSpec& a : cfg_.agents) {
            names_[a.id] = a.name;
            if (a.role == Role::publisher) publishers_.push_back(&a);
            if (a.role == Role::fullnode) node_specs_.push_back(&a);
            if (a.role == Role::miner) {
                MinerState m;
                m.spec = &a;
                m.miner_index = miners_.size();
                miners_.push_back(std::move(m));
            }
        }
        double total_compute = cfg_.protocol.stats.median_compute *
                               static_cast<double>(std::max<std::size_t>(1, miners_.size()));
        for (MinerState& m : miners_) m.flops_per_s = m.spec->compute_share * total_compute;
        for (std::size_t i = 0; i < node_specs_.size(); ++i) {
            nodes_.emplace_back(cfg_.protocol, &store_);
        }
        plan_tasks();
        plan_transactions();
    }

    SimResult run();

private:
    // --- planning -------------------------------------------------------------

    double interval() const { return cfg_.protocol.phases.interval(); }
    double t_a(std::uint64_t h) const { return static_cast<double>(h - 1) * interval(); }
    double t_c(std::uint64_t h) const {
        return t_a(h) + cfg_.protocol.phases.p1 + cfg_.protocol.phases.p2;
    }

    void plan_tasks() {
        if (publishers_.empty()) return;
        DetRng rng(mix64(cfg_.seed, 0x7a53));
        std::size_t counter = 0;
        auto make_task = [&](std::uint64_t height, std::uint32_t j) {
            PlannedTask p;
            p.submit_at = t_a(height) + 1.0 + 0.5 * j;
            p.publisher_idx = counter % publishers_.size();
            const TaskDefaults& d = cfg_.task_defaults;
            Task t;
            t.publisher_id = publishers_[p.publisher_idx]->id;
            t.reward = d.reward_min + rng.bounded(d.reward_max - d.reward_min + 1);
            std::uint64_t data_seed = mix64(cfg_.seed, 0xda7a0000 + counter);
            t.data_link = data_link_for(data_seed, d.dataset_n, d.d, d.noise);
            TrainerConfig recipe;
            recipe.hidden_dim = d.hidden;
            recipe.learning_rate = d.lr;
            recipe.batch_size = d.batch;
            recipe.epochs_budget = d.epochs_cap;
            t.model_link = recipe_link_for(recipe);
            t.model_size = d.model_size + rng.bounded(d.model_size / 5 + 1);
            t.data_size = d.data_size + rng.bounded(d.data_size / 5 + 1);
            t.flops = d.flops * (0.9 + 0.2 * rng.uniform());
            t.submit_time = p.submit_at;
            p.task = t;
            ++counter;
            planned_tasks_.push_back(std::move(p));
        };
        for (std::uint32_t j = 0; j < cfg_.initial_tasks; ++j) make_task(1, j);
        for (std::uint64_t h = 2; h <= cfg_.num_blocks; ++h) {
            for (std::uint32_t j = 0; j < cfg_.tasks_per_block; ++j) make_task(h, j);
        }
    }

    void plan_transactions() {
        DetRng rng(mix64(cfg_.seed, 0x7c5a));
        for (std::uint64_t h = 1; h <= cfg_.num_blocks; ++h) {
            for (std::uint32_t j = 0; j < cfg_.tx_per_block; ++j) {
                Bytes tx(32);
                for (auto& b : tx) b = static_cast<std::uint8_t>(rng.bounded(256));
                planned_txs_.push_back(PlannedTx{h, std::move(tx)});
            }
        }
    }

    // --- event machinery --------------------------------------------------------

    void schedule_event(double at, const AgentId& from, const AgentId& to, Payload payload) {
        queue_.push(QueueItem{at, seq_++, SimEvent{at, seq_, from, to, std::move(payload)}});
    }

    void schedule_control(double at, Control c) { queue_.push(QueueItem{at, seq_++, c}); }

    double link_latency(const AgentSpec& a) const { return a.latency; }
    double link_bandwidth(const AgentSpec& a) const {
        return a.bandwidth > 0.0 ? a.bandwidth : cfg_.protocol.stats.median_bandwidth;
    }

    void broadcast_to_nodes(double now, const AgentId& from, const Payload& payload,
                            std::uint64_t bytes) {
        for (const AgentSpec* n : node_specs_) {
            schedule_event(now + transfer_delay(link_latency(*n), link_bandwidth(*n), bytes), from,
                           n->id, payload);
        }
    }

    void broadcast_to_miners(double now, const AgentId& from, const Payload& payload,
                             std::uint64_t bytes) {
        for (const MinerState& m : miners_) {
            schedule_event(
                now + transfer_delay(link_latency(*m.spec), link_bandwidth(*m.spec), bytes), from,
                m.spec->id, payload);
        }
    }

    // --- helpers ------------------------------------------------------------------

    FullNode& node0() { return nodes_.front(); }

    StreamKey key_for_task(const TaskId& id) const {
        Sha256Stream s;
        ByteWriter w;
        w.u64(cfg_.seed);
        s.update(ByteSpan(w.bytes().data(), w.bytes().size()));
        s.update(id.bytes);
        return s.finish();
    }

    const PlannedTask* planned_for(const TaskId& id) const {
        for (const PlannedTask& p : planned_tasks_) {
            if (task_id(p.task) == id) return &p;
        }
        return nullptr;
    }

    /// Publisher-side release of encrypted data (and, bootstrap aside, the key
    /// at the end of the running Phase 3).
    void release_task_data(double now, const TaskId& id, double key_at) {
        if (released_.contains(id)) return;
        const PlannedTask* p = planned_for(id);
        if (p == nullptr) return;
        released_.insert(id);

        Dataset ds = dataset_from_link(p->task.data_link);
        Bytes plain = serialize_dataset(ds);
        StreamKey key = key_for_task(id);
        Bytes cipher = xor_keystream(key, ByteSpan(plain.data(), plain.size()));

        const AgentId& pub = p->task.publisher_id;
        for (const MinerState& m : miners_) {
            double arrive = now + transfer_delay(link_latency(*m.spec), link_bandwidth(*m.spec),
                                                 p->task.data_size);
            schedule_event(arrive, pub, m.spec->id, MsgEncryptedData{id, cipher, p->task.data_size});
        }
        for (const MinerState& m : miners_) {
            double arrive =
                std::max(key_at, now) +
                transfer_delay(link_latency(*m.spec), link_bandwidth(*m.spec), sizeof(StreamKey));
            schedule_event(arrive, pub, m.spec->id, MsgKeyRelease{id, key});
        }
    }

    void handle_interval_start(double now, std::uint64_t height);
    void handle_p3_start(double now, std::uint64_t height);
    void handle_accept(double now, std::uint64_t height);

    void miner_on_release(MinerState& m, double now);
    void miner_train(MinerState& m, double now);
    void miner_on_test_release(MinerState& m, double now);
    void thief_on_candidate(MinerState& m, double now, const Candidate& observed);

    void deliver(const SimEvent& ev, double now);

    ChainView build_fork(const MinerState& forker);

    // --- state ---------------------------------------------------------------------

    ScenarioConfig cfg_;
    ModelStore& store_;
    DetRng rng_;

    std::map<AgentId, std::string> names_;
    std::vector<const AgentSpec*> publishers_;
    std::vector<const AgentSpec*> node_specs_;
    std::vector<FullNode> nodes_;
    std::vector<MinerState> miners_;

    std::vector<PlannedTask> planned_tasks_;
    std::vector<PlannedTx> planned_txs_;
    std::set<TaskId> released_;

    std::priority_queue<QueueItem, std::vector<QueueItem>, QueueOrder> queue_;
    std::uint64_t seq_ = 0;

    SimReport report_;
    std::uint64_t current_queue_len_ = 0;
};

void Simulator::handle_interval_start(double now, std::uint64_t height) {
    // Deterministic opaque transactions reach every node identically.
    for (const PlannedTx& tx : planned_txs_) {
        if (tx.height == height) {
            for (FullNode& n : nodes_) n.pool().add_transaction(tx.payload);
        }
    }

    current_queue_len_ = node0().pending_queue_len();

    for (MinerState& m : miners_) m.acted_this_block = false;

    // Late/fallback release: when the mined task's data was never
    // pre-released (bootstrap or an idle-block surprise), it ships now and
    // the key follows immediately — secrecy has no value once P1 started.
    if (auto pending = node0().pending_task()) {
        if (!released_.contains(*pending)) release_task_data(now + 0.1, *pending, now + 0.1);
        // A prior pre-release already armed the miners; let them re-check
        // since the pending task may have flipped after an idle block.
        for (MinerState& m : miners_) miner_on_release(m, now + 0.1);
    }

    schedule_control(t_c(height), Control{Control::p3_start, height});
    schedule_control(t_a(height) + interval(), Control{Control::accept, height});
    if (height < cfg_.num_blocks) {
        schedule_control(t_a(height + 1), Control{Control::interval_start, height + 1});
    }
}

void Simulator::handle_p3_start(double now, std::uint64_t height) {
    // Test API opens: the selected task's publisher releases the held-out
    // split to miners and full nodes.
    if (auto pending = node0().pending_task()) {
        const PlannedTask* p = planned_for(*pending);
        AgentId pub = p ? p->task.publisher_id : AgentId{};
        broadcast_to_miners(now, pub, MsgTestRelease{*pending}, kSmallMsgBytes);
    }

    // Early encrypted release for the predicted next task; its key unlocks at
    // the end of this Phase 3.
    std::vector<Task> post;
    const FullNode& n0 = node0();
    auto pending = n0.pending_task();
    for (const Task& t : n0.pool().unselected_tasks()) {
        if (!pending || task_id(t) != *pending) post.push_back(t);
    }
    for (const Task& t : n0.pool().unconfirmed_tasks()) post.push_back(t);
    if (auto next = select_task(post, cfg_.protocol.ranking, cfg_.protocol.stats)) {
        release_task_data(now, *next, t_a(height) + interval());
    }
}

void Simulator::miner_on_release(MinerState& m, double now) {
    if (m.spec->behavior == Behavior::forker) return; // mines privately
    auto pending = node0().pending_task();
    if (!pending) return;
    std::uint64_t height = node0().mining_height();
    if (m.trained_height == height) return;
    auto it = m.releases.find(*pending);
    if (it == m.releases.end() || !it->second.have_cipher || !it->second.have_key) return;

    // Both ciphertext and key are in hand: decrypt and train.
    Bytes plain = xor_keystream(it->second.key, ByteSpan(it->second.ciphertext.data(),
                                                         it->second.ciphertext.size()));
    m.dataset = deserialize_dataset(ByteSpan(plain.data(), plain.size()));
    m.trained_height = height;
    m.trained_task = *pending;
    miner_train(m, now);
}

void Simulator::miner_train(MinerState& m, double now) {
    const Task& task = *node0().pending_task_record();
    const double epoch_cost = task.flops / m.flops_per_s;

    // Finish the last full epoch before t_c on the miner's own clock, with a
    // safety margin for skew and transit.
    double stop_global = t_c(node0().mining_height()) - cfg_.commit_safety_margin - m.spec->clock_skew;
    double available = stop_global - now;
    std::uint32_t budget =
        available > 0.0 ? static_cast<std::uint32_t>(std::floor(available / epoch_cost)) : 0;

    m.trainer_seed = mix64(cfg_.seed, mix64(node0().mining_height(), m.miner_index));
    TrainerConfig config =
        config_from_link(task.model_link, m.trainer_seed, cfg_.protocol.wm.lambda);
    budget = std::min(budget, config.epochs_budget);
    if (budget == 0) return;

    Hash256 prev = block_digest(node0().chain().blocks.back().header);
    auto [wm, key] = derive_watermark(watermark_seed(prev, m.trained_task, m.spec->id),
                                      cfg_.protocol.wm, model_dim(m.dataset.d, config.hidden_dim));
    WatermarkSpec spec{wm, key};

    TrainRun run = train_model(m.dataset, config, &spec, +1, budget);
    m.run_ref = store_.put_run(run.checkpoints);
    m.final_weights = run.checkpoints.back().weights;
    m.checkpoint_digests.clear();
    for (const Checkpoint& ck : run.checkpoints) m.checkpoint_digests.push_back(ck.digest);
    m.epochs = budget;
    m.train_time = static_cast<double>(budget) * epoch_cost;

    double done = now + m.train_time;
    if (m.spec->behavior == Behavior::thief) {
        // Thieves skip the work and plant a junk commitment inside the window.
        Hash256 junk{};
        for (auto& b : junk) b = static_cast<std::uint8_t>(rng_.bounded(256));
        m.commitment = ModelCommitment{m.spec->id, m.trained_task, junk, now + 1.0};
        broadcast_to_nodes(now + 1.0, m.spec->id, MsgCommitment{m.commitment}, kSmallMsgBytes);
        return;
    }

    m.commitment = model_commitment(m.final_weights, m.spec->id, m.trained_task, done);
    double send_at = done;
    if (m.spec->behavior == Behavior::withholder) {
        // Holds the commitment back until after the deadline.
        send_at = t_c(node0().mining_height()) - m.spec->clock_skew + 10.0;
        m.commitment.commit_time = send_at;
    }
    broadcast_to_nodes(send_at, m.spec->id, MsgCommitment{m.commitment}, kSmallMsgBytes);
}

void Simulator::miner_on_test_release(MinerState& m, double now) {
    if (m.spec->behavior == Behavior::forker) return;
    std::uint64_t height = node0().mining_height();
    if (m.trained_height != height || m.run_ref.empty()) return;
    if (m.spec->behavior == Behavior::thief) return; // acts on observed candidates instead

    double accuracy = evaluate_accuracy(m.final_weights, m.dataset, m.dataset.test_idx);
    double claimed = accuracy;
    if (m.spec->behavior == Behavior::accuracy_liar) {
        claimed = std::min(1.0, accuracy + 0.05);
    }

    BlockTemplate tmpl = node0().block_template();
    auto [wm, key] =
        derive_watermark(watermark_seed(tmpl.prev_digest, tmpl.selected, m.spec->id),
                         cfg_.protocol.wm, m.final_weights.dim());

    Candidate cand;
    cand.model_ref = m.run_ref;
    cand.wm = wm;
    cand.key = key;
    cand.checkpoints = m.checkpoint_digests;
    cand.block.header.height = tmpl.height;
    cand.block.header.prev_digest = tmpl.prev_digest;
    cand.block.header.timestamp = tmpl.timestamp;
    cand.block.header.selected_task = tmpl.selected;
    cand.block.header.unselected_tasks = tmpl.unselected_after;
    cand.block.header.claimed_accuracy = claimed;
    cand.block.header.winner_id = m.spec->id;
    cand.block.header.model_link = model_link_for(m.run_ref, m.trainer_seed);
    cand.block.header.model_signature =
        model_signature(m.final_weights, dataset_digest(m.dataset), tmpl.selected_record);
    cand.block.transactions = tmpl.transactions;
    cand.block.confirmed_tasks = tmpl.confirmed;
    cand.block.coinbase = tmpl.coinbase;
    cand.block.winner_commitment = m.commitment;
    cand.block.header.data_digest = body_digest(cand.block);

    double send = now + kCandidateBuildDelay;
    broadcast_to_nodes(send, m.spec->id, MsgCandidate{cand}, kCandidateBytes);
    // Thieves watch the candidate channel.
    for (MinerState& other : miners_) {
        if (other.spec->behavior == Behavior::thief) {
            schedule_event(send + transfer_delay(link_latency(*other.spec),
                                                 link_bandwidth(*other.spec), kCandidateBytes),
                           m.spec->id, other.spec->id, MsgCandidate{cand});
        }
    }
}

void Simulator::thief_on_candidate(MinerState& m, double now, const Candidate& observed) {
    if (m.acted_this_block) return;
    m.acted_this_block = true;

    std::uint64_t height = node0().mining_height();
    const Task* task = node0().pending_task_record();
    if (task == nullptr) return;

    ModelWeights stolen;
    try {
        stolen = store_.load_final(observed.model_ref);
    } catch (const std::exception&) {
        return;
    }
    Dataset ds = node0().dataset_for(*task);

    // Whatever attack time is left before the block closes.
    const double epoch_cost = task->flops / m.flops_per_s;
    double deadline = t_a(height) + interval() - 1.0;
    std::uint32_t budget = deadline > now
                               ? static_cast<std::uint32_t>(std::floor((deadline - now) / epoch_cost))
                               : 0;

    TrainerConfig cfg = config_from_link(task->model_link, mix64(cfg_.seed, 0x7e1f + height),
                                         cfg_.protocol.wm.lambda);
    Hash256 prev = observed.block.header.prev_digest;
    // The victim's watermark is public: attack it by training it out.
    auto [victim_wm, victim_key] =
        derive_watermark(watermark_seed(prev, observed.block.header.selected_task,
                                        observed.block.header.winner_id),
                         cfg_.protocol.wm, stolen.dim());

    ModelWeights attacked = stolen;
    std::vector<Checkpoint> trail;
    double spent = 0.0;
    if (budget > 0) {
        TrainerConfig attack_cfg = cfg;
        attack_cfg.epochs_budget = budget;
        EmbedResult res = removal_attack(std::move(attacked), ds, attack_cfg, victim_wm, victim_key,
                                         cfg_.protocol.wm.threshold);
        attacked = std::move(res.weights);
        trail = std::move(res.checkpoints);
        spent = static_cast<double>(res.epochs_used) * epoch_cost;
    } else {
        Checkpoint only;
        only.epoch = 0;
        only.weights = attacked;
        only.digest = checkpoint_digest(attacked, 0);
        trail.push_back(std::move(only));
    }
    std::string ref = store_.put_run(trail);

    double accuracy = evaluate_accuracy(attacked, ds, ds.test_idx);
    BlockTemplate tmpl = node0().block_template();
    auto [own_wm, own_key] =
        derive_watermark(watermark_seed(tmpl.prev_digest, tmpl.selected, m.spec->id),
                         cfg_.protocol.wm, attacked.dim());

    Candidate cand;
    cand.model_ref = ref;
    cand.wm = own_wm;
    cand.key = own_key;
    for (const Checkpoint& ck : trail) cand.checkpoints.push_back(ck.digest);
    cand.block.header.height = tmpl.height;
    cand.block.header.prev_digest = tmpl.prev_digest;
    cand.block.header.timestamp = tmpl.timestamp;
    cand.block.header.selected_task = tmpl.selected;
    cand.block.header.unselected_tasks = tmpl.unselected_after;
    cand.block.header.claimed_accuracy = accuracy;
    cand.block.header.winner_id = m.spec->id;
    cand.block.header.model_link = model_link_for(ref, cfg.seed);
    cand.block.header.model_signature = model_signature(attacked, dataset_digest(ds), *task);
    cand.block.transactions = tmpl.transactions;
    cand.block.confirmed_tasks = tmpl.confirmed;
    cand.block.coinbase = tmpl.coinbase;
    cand.block.winner_commitment = m.commitment;
    cand.block.header.data_digest = body_digest(cand.block);

    broadcast_to_nodes(now + spent + 0.2, m.spec->id, MsgCandidate{cand}, kCandidateBytes);
}

void Simulator::handle_accept(double now, std::uint64_t height) {
    FullNode::AcceptOutcome outcome = nodes_.front().accept_block();
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        FullNode::AcceptOutcome other = nodes_[i].accept_block();
        if (block_digest(other.block.header) != block_digest(outcome.block.header)) {
            throw SimError("full nodes diverged on block " + std::to_string(height));
        }
        if (nodes_[i].pool().digest() != nodes_.front().pool().digest()) {
            throw SimError("full node pools diverged after block " + std::to_string(height));
        }
    }

    SimBlockRow row;
    row.height = height;
    row.idle = outcome.idle;
    row.selected_task = to_hex(outcome.block.header.selected_task.bytes);
    row.accuracy = outcome.block.header.claimed_accuracy;
    row.publisher_frac = outcome.block.coinbase.publisher_frac;
    row.miner_frac = outcome.block.coinbase.miner_frac;
    row.queue_len = current_queue_len_;
    row.candidates = static_cast<std::uint32_t>(outcome.rejections.size() + (outcome.idle ? 0 : 1));

    std::string rejections;
    for (const auto& [id, reason] : outcome.rejections) {
        if (!rejections.empty()) rejections += '|';
        auto it = names_.find(id);
        rejections += (it == names_.end() ? to_hex(id.bytes).substr(0, 8) : it->second);
        rejections += ':';
        rejections += to_string(reason);
    }
    row.rejections = std::move(rejections);

    if (!outcome.idle) {
        auto it = names_.find(outcome.block.header.winner_id);
        row.winner = it == names_.end() ? to_hex(outcome.block.header.winner_id.bytes) : it->second;
        for (const MinerState& m : miners_) {
            if (m.spec->id == outcome.block.header.winner_id) {
                row.training_s = m.train_time;
                break;
            }
        }
        const Task* selected = nullptr;
        for (const Task& t : outcome.block.confirmed_tasks) {
            if (task_id(t) == outcome.block.header.selected_task) selected = &t;
        }
        // Validation-side overhead: fetching the winner model plus the key,
        // analogous to the signature+network columns of the overhead table.
        std::uint64_t model_bytes = selected ? selected->model_size : cfg_.task_defaults.model_size;
        row.overhead_s = transfer_delay(0.05, cfg_.protocol.stats.median_bandwidth, model_bytes) +
                         transfer_delay(0.05, cfg_.protocol.stats.median_bandwidth, 32);
    }
    report_.rows.push_back(std::move(row));

    // Everyone hears about the block.
    broadcast_to_miners(now, node_specs_.front()->id, MsgBlock{outcome.block}, kSmallMsgBytes);
}

void Simulator::deliver(const SimEvent& ev, double now) {
    // Full node inbox.
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (node_specs_[i]->id != ev.to) continue;
        FullNode& node = nodes_[i];
        double local_now = now + node_specs_[i]->clock_skew;
        if (const auto* msg = std::get_if<MsgTaskSubmit>(&ev.payload)) {
            node.submit_task(msg->task, local_now);
        } else if (const auto* msg = std::get_if<MsgCommitment>(&ev.payload)) {
            CommitResult r = node.record_commitment(msg->commitment, local_now);
            if (i == 0) {
                if (r == CommitResult::accepted) ++report_.commitments_accepted;
                if (r == CommitResult::rejected_late) ++report_.commitments_late;
            }
        } else if (const auto* msg = std::get_if<MsgCandidate>(&ev.payload)) {
            node.add_candidate(msg->candidate);
        }
        return;
    }

    // Miner inbox.
    for (MinerState& m : miners_) {
        if (m.spec->id != ev.to) continue;
        if (const auto* msg = std::get_if<MsgEncryptedData>(&ev.payload)) {
            auto& rel = m.releases[msg->task];
            rel.ciphertext = msg->ciphertext;
            rel.have_cipher = true;
            miner_on_release(m, now);
        } else if (const auto* msg = std::get_if<MsgKeyRelease>(&ev.payload)) {
            auto& rel = m.releases[msg->task];
            rel.key = msg->key;
            rel.have_key = true;
            miner_on_release(m, now);
        } else if (std::get_if<MsgTestRelease>(&ev.payload) != nullptr) {
            miner_on_test_release(m, now);
        } else if (const auto* msg = std::get_if<MsgCandidate>(&ev.payload)) {
            if (m.spec->behavior == Behavior::thief) thief_on_candidate(m, now, msg->candidate);
        }
        return;
    }
}

ChainView Simulator::build_fork(const MinerState& forker) {
    FullNode fork_node(cfg_.protocol, &store_);
    const double margin = cfg_.commit_safety_margin;
    std::size_t next_submission = 0;

    std::vector<const PlannedTask*> by_time;
    for (const PlannedTask& p : planned_tasks_) by_time.push_back(&p);
    std::sort(by_time.begin(), by_time.end(),
              [](const PlannedTask* a, const PlannedTask* b) { return a->submit_at < b->submit_at; });

    for (std::uint64_t h = 1; h <= cfg_.num_blocks; ++h) {
        double end = t_a(h) + interval();
        while (next_submission < by_time.size() && by_time[next_submission]->submit_at < end) {
            const PlannedTask* p = by_time[next_submission];
            if (p->submit_at >= t_c(h)) break; // frozen during P3
            fork_node.submit_task(p->task, p->submit_at);
            ++next_submission;
        }
        for (const PlannedTx& tx : planned_txs_) {
            if (tx.height == h) fork_node.pool().add_transaction(tx.payload);
        }

        if (auto pending = fork_node.pending_task()) {
            const Task task = *fork_node.pending_task_record();
            double epoch_cost = task.flops / forker.flops_per_s;
            double ready = t_a(h) + transfer_delay(link_latency(*forker.spec),
                                                   link_bandwidth(*forker.spec), task.data_size);
            double available = t_c(h) - margin - ready;
            std::uint32_t budget =
                available > 0.0 ? static_cast<std::uint32_t>(std::floor(available / epoch_cost)) : 0;

            std::uint64_t seed = mix64(cfg_.seed, mix64(0xf02c + h, forker.miner_index));
            TrainerConfig config = config_from_link(task.model_link, seed, cfg_.protocol.wm.lambda);
            budget = std::min(budget, config.epochs_budget);

            if (budget > 0) {
                Dataset ds = dataset_from_link(task.data_link);
                Hash256 prev = block_digest(fork_node.chain().blocks.back().header);
                auto [wm, key] = derive_watermark(watermark_seed(prev, *pending, forker.spec->id),
                                                  cfg_.protocol.wm,
                                                  model_dim(ds.d, config.hidden_dim));
                WatermarkSpec spec{wm, key};
                TrainRun run = train_model(ds, config, &spec, +1, budget);
                std::string ref = store_.put_run(run.checkpoints);
                ModelWeights final = run.checkpoints.back().weights;

                double done = ready + static_cast<double>(budget) * epoch_cost;
                ModelCommitment commit = model_commitment(final, forker.spec->id, *pending, done);
                fork_node.record_commitment(commit, done);

                BlockTemplate tmpl = fork_node.block_template();
                Candidate cand;
                cand.model_ref = ref;
                cand.wm = wm;
                cand.key = key;
                for (const Checkpoint& ck : run.checkpoints) cand.checkpoints.push_back(ck.digest);
                cand.block.header.height = tmpl.height;
                cand.block.header.prev_digest = tmpl.prev_digest;
                cand.block.header.timestamp = tmpl.timestamp;
                cand.block.header.selected_task = tmpl.selected;
                cand.block.header.unselected_tasks = tmpl.unselected_after;
                cand.block.header.claimed_accuracy = evaluate_accuracy(final, ds, ds.test_idx);
                cand.block.header.winner_id = forker.spec->id;
                cand.block.header.model_link = model_link_for(ref, seed);
                cand.block.header.model_signature =
                    model_signature(final, dataset_digest(ds), task);
                cand.block.transactions = tmpl.transactions;
                cand.block.confirmed_tasks = tmpl.confirmed;
                cand.block.coinbase = tmpl.coinbase;
                cand.block.winner_commitment = commit;
                cand.block.header.data_digest = body_digest(cand.block);
                fork_node.add_candidate(std::move(cand));
            }
        }
        fork_node.accept_block();
    }
    return fork_node.chain();
}

SimResult Simulator::run() {
    // All planned submissions go on the wire up front; the queue orders them.
    for (const PlannedTask& p : planned_tasks_) {
        const AgentSpec* pub = publishers_[p.publisher_idx];
        for (const AgentSpec* n : node_specs_) {
            schedule_event(p.submit_at +
                               transfer_delay(link_latency(*n), link_bandwidth(*n), kSmallMsgBytes),
                           pub->id, n->id, MsgTaskSubmit{p.task});
        }
    }
    schedule_control(0.0, Control{Control::interval_start, 1});

    double end_time = static_cast<double>(cfg_.num_blocks) * interval();
    while (!queue_.empty()) {
        QueueItem item = queue_.top();
        queue_.pop();
        if (item.at > end_time + 1e-9) continue;
        if (const Control* c = std::get_if<Control>(&item.body)) {
            switch (c->kind) {
                case Control::interval_start: handle_interval_start(item.at, c->height); break;
                case Control::p3_start: handle_p3_start(item.at, c->height); break;
                case Control::accept: handle_accept(item.at, c->height); break;
            }
        } else {
            deliver(std::get<SimEvent>(item.body), item.at);
        }
    }

    SimResult result;
    result.protocol = cfg_.protocol;
    result.chain = nodes_.front().chain();

    for (const MinerState& m : miners_) {
        if (m.spec->behavior == Behavior::forker) {
            ChainView fork = build_fork(m);
            ForkOutcome fo;
            fo.honest_high = result.chain.high_accuracy_count(cfg_.protocol.fork_threshold);
            fo.fork_high = fork.high_accuracy_count(cfg_.protocol.fork_threshold);
            fo.honest_cumulative = result.chain.cumulative_accuracy();
            fo.fork_cumulative = fork.cumulative_accuracy();
            std::vector<ChainView> chains{result.chain, fork};
            fo.fork_won = fork_choice(chains, cfg_.protocol.fork_threshold) == 1;
            report_.fork = fo;
            result.fork_chain = std::move(fork);
            break;
        }
    }

    result.report = std::move(report_);
    return result;
}

} // namespace

std::string SimReport::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "height,idle,winner,selected_task,claimed_accuracy,publisher_frac,miner_frac,"
           "queue_len,candidates,rejections,training_s,overhead_s\n";
    for (const SimBlockRow& r : rows) {
        out << r.height << ',' << (r.idle ? 1 : 0) << ',' << r.winner << ',' << r.selected_task
            << ',' << r.accuracy << ',' << r.publisher_frac << ',' << r.miner_frac << ','
            << r.queue_len << ',' << r.candidates << ',' << r.rejections << ',' << r.training_s
            << ',' << r.overhead_s << '\n';
    }
    return out.str();
}

SimResult run(const ScenarioConfig& config, ModelStore& store) {
    Simulator sim(config, store);
    return sim.run();
}

} // namespace dlbc
