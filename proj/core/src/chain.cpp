// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "dlbc/chain.hpp"

#include "dlbc/sha256.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace dlbc {

using nlohmann::json;

Bytes serialize_model(const ModelWeights& w) {
    ByteWriter out;
    out.u64(w.weights.size());
    for (double v : w.weights) {
        if (!std::isfinite(v)) throw SerializeError("serialize_model: non-finite weight");
        out.f64(v);
    }
    return out.take();
}

ModelWeights deserialize_model(ByteSpan data) {
    ByteReader r(data);
    std::uint64_t dim = r.u64();
    if (r.remaining() != dim * 8) throw SerializeError("deserialize_model: length mismatch");
    ModelWeights w;
    w.weights.reserve(dim);
    for (std::uint64_t i = 0; i < dim; ++i) {
        double v = r.f64();
        if (!std::isfinite(v)) throw SerializeError("deserialize_model: non-finite weight");
        w.weights.push_back(v);
    }
    return w;
}

ModelCommitment model_commitment(const ModelWeights& w, const AgentId& miner, const TaskId& task,
                                 double commit_time) {
    Sha256Stream s;
    Bytes model = serialize_model(w);
    s.update(ByteSpan(model.data(), model.size()));
    s.update(miner.bytes);
    s.update(task.bytes);
    return ModelCommitment{miner, task, s.finish(), commit_time};
}

Bytes task_content_bytes(const Task& t) {
    ByteWriter out;
    out.hash(t.publisher_id.bytes);
    out.u64(t.reward);
    out.str(t.model_link);
    out.str(t.data_link);
    out.u64(t.model_size);
    out.u64(t.data_size);
    out.f64(t.flops);
    return out.take();
}

TaskId task_id(const Task& t) {
    Bytes content = task_content_bytes(t);
    return TaskId{sha256(ByteSpan(content.data(), content.size()))};
}

Bytes serialize_task(const Task& t) {
    ByteWriter out;
    Bytes content = task_content_bytes(t);
    out.raw(ByteSpan(content.data(), content.size()));
    out.f64(t.submit_time);
    return out.take();
}

Task deserialize_task(ByteReader& r) {
    Task t;
    t.publisher_id.bytes = r.hash();
    t.reward = r.u64();
    t.model_link = r.str();
    t.data_link = r.str();
    t.model_size = r.u64();
    t.data_size = r.u64();
    t.flops = r.f64();
    t.submit_time = r.f64();
    return t;
}

Bytes serialize_header(const BlockHeader& h) {
    ByteWriter out;
    out.u64(h.height);
    out.hash(h.prev_digest);
    out.hash(h.data_digest);
    out.f64(h.timestamp);
    out.hash(h.model_signature);
    out.hash(h.selected_task.bytes);
    out.u64(h.unselected_tasks.size());
    for (const TaskId& id : h.unselected_tasks) out.hash(id.bytes);
    out.f64(h.claimed_accuracy);
    out.hash(h.winner_id.bytes);
    out.str(h.model_link);
    return out.take();
}

BlockHeader deserialize_header(ByteReader& r) {
    BlockHeader h;
    h.height = r.u64();
    h.prev_digest = r.hash();
    h.data_digest = r.hash();
    h.timestamp = r.f64();
    h.model_signature = r.hash();
    h.selected_task.bytes = r.hash();
    std::uint64_t n = r.u64();
    h.unselected_tasks.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) h.unselected_tasks.push_back(TaskId{r.hash()});
    h.claimed_accuracy = r.f64();
    h.winner_id.bytes = r.hash();
    h.model_link = r.str();
    return h;
}

static void check_header_invariants(const BlockHeader& h) {
    if (!(h.claimed_accuracy >= 0.0 && h.claimed_accuracy <= 1.0)) {
        throw SerializeError("header: claimed_accuracy outside [0,1]");
    }
    std::set<TaskId> seen;
    for (const TaskId& id : h.unselected_tasks) {
        if (id == h.selected_task) throw SerializeError("header: selected task listed as unselected");
        if (!seen.insert(id).second) throw SerializeError("header: duplicate unselected task");
    }
}

Hash256 block_digest(const BlockHeader& h) {
    check_header_invariants(h);
    Bytes raw = serialize_header(h);
    return sha256(ByteSpan(raw.data(), raw.size()));
}

Bytes serialize_block_body(const Block& b) {
    ByteWriter out;
    out.u64(b.transactions.size());
    for (const Bytes& tx : b.transactions) out.blob(ByteSpan(tx.data(), tx.size()));
    out.u64(b.confirmed_tasks.size());
    for (const Task& t : b.confirmed_tasks) {
        Bytes enc = serialize_task(t);
        out.raw(ByteSpan(enc.data(), enc.size()));
    }
    out.f64(b.coinbase.publisher_frac);
    out.f64(b.coinbase.miner_frac);
    out.u8(b.winner_commitment ? 1 : 0);
    if (b.winner_commitment) {
        const ModelCommitment& c = *b.winner_commitment;
        out.hash(c.miner_id.bytes);
        out.hash(c.task.bytes);
        out.hash(c.digest);
        out.f64(c.commit_time);
    }
    return out.take();
}

Hash256 body_digest(const Block& b) {
    if (b.coinbase.publisher_frac + b.coinbase.miner_frac != 1.0) {
        throw SerializeError("block: coinbase fractions do not sum to 1");
    }
    Bytes raw = serialize_block_body(b);
    return sha256(ByteSpan(raw.data(), raw.size()));
}

Bytes serialize_block(const Block& b) {
    ByteWriter out;
    Bytes hdr = serialize_header(b.header);
    out.raw(ByteSpan(hdr.data(), hdr.size()));
    Bytes body = serialize_block_body(b);
    out.raw(ByteSpan(body.data(), body.size()));
    return out.take();
}

Block deserialize_block(ByteSpan data) {
    ByteReader r(data);
    Block b;
    b.header = deserialize_header(r);
    std::uint64_t ntx = r.u64();
    b.transactions.reserve(ntx);
    for (std::uint64_t i = 0; i < ntx; ++i) b.transactions.push_back(r.blob());
    std::uint64_t ntasks = r.u64();
    b.confirmed_tasks.reserve(ntasks);
    for (std::uint64_t i = 0; i < ntasks; ++i) b.confirmed_tasks.push_back(deserialize_task(r));
    b.coinbase.publisher_frac = r.f64();
    b.coinbase.miner_frac = r.f64();
    if (r.u8() != 0) {
        ModelCommitment c;
        c.miner_id.bytes = r.hash();
        c.task.bytes = r.hash();
        c.digest = r.hash();
        c.commit_time = r.f64();
        b.winner_commitment = c;
    }
    if (!r.done()) throw SerializeError("deserialize_block: trailing bytes");
    return b;
}

// --- JSON dump --------------------------------------------------------------

static json task_to_json_obj(const Task& t) {
    return json{{"publisher_id", to_hex(t.publisher_id.bytes)},
                {"reward", t.reward},
                {"model_link", t.model_link},
                {"data_link", t.data_link},
                {"model_size", t.model_size},
                {"data_size", t.data_size},
                {"flops", t.flops},
                {"submit_time", t.submit_time}};
}

static Task task_from_json_obj(const json& j) {
    Task t;
    t.publisher_id.bytes = hash_from_hex(j.at("publisher_id").get<std::string>());
    t.reward = j.at("reward").get<std::uint64_t>();
    t.model_link = j.at("model_link").get<std::string>();
    t.data_link = j.at("data_link").get<std::string>();
    t.model_size = j.at("model_size").get<std::uint64_t>();
    t.data_size = j.at("data_size").get<std::uint64_t>();
    t.flops = j.at("flops").get<double>();
    t.submit_time = j.at("submit_time").get<double>();
    return t;
}

std::string block_to_json(const Block& b) {
    json hdr{{"height", b.header.height},
             {"prev_digest", to_hex(b.header.prev_digest)},
             {"data_digest", to_hex(b.header.data_digest)},
             {"timestamp", b.header.timestamp},
             {"model_signature", to_hex(b.header.model_signature)},
             {"selected_task", to_hex(b.header.selected_task.bytes)},
             {"claimed_accuracy", b.header.claimed_accuracy},
             {"winner_id", to_hex(b.header.winner_id.bytes)},
             {"model_link", b.header.model_link}};
    json unsel = json::array();
    for (const TaskId& id : b.header.unselected_tasks) unsel.push_back(to_hex(id.bytes));
    hdr["unselected_tasks"] = unsel;

    json txs = json::array();
    for (const Bytes& tx : b.transactions) txs.push_back(to_hex(ByteSpan(tx.data(), tx.size())));
    json tasks = json::array();
    for (const Task& t : b.confirmed_tasks) tasks.push_back(task_to_json_obj(t));

    json j{{"header", hdr},
           {"transactions", txs},
           {"confirmed_tasks", tasks},
           {"coinbase",
            {{"publisher_frac", b.coinbase.publisher_frac}, {"miner_frac", b.coinbase.miner_frac}}}};
    if (b.winner_commitment) {
        const ModelCommitment& c = *b.winner_commitment;
        j["winner_commitment"] = json{{"miner_id", to_hex(c.miner_id.bytes)},
                                      {"task", to_hex(c.task.bytes)},
                                      {"digest", to_hex(c.digest)},
                                      {"commit_time", c.commit_time}};
    } else {
        j["winner_commitment"] = nullptr;
    }
    return j.dump();
}

Block block_from_json(const std::string& line) {
    json j = json::parse(line);
    Block b;
    const json& hdr = j.at("header");
    b.header.height = hdr.at("height").get<std::uint64_t>();
    b.header.prev_digest = hash_from_hex(hdr.at("prev_digest").get<std::string>());
    b.header.data_digest = hash_from_hex(hdr.at("data_digest").get<std::string>());
    b.header.timestamp = hdr.at("timestamp").get<double>();
    b.header.model_signature = hash_from_hex(hdr.at("model_signature").get<std::string>());
    b.header.selected_task.bytes = hash_from_hex(hdr.at("selected_task").get<std::string>());
    for (const auto& id : hdr.at("unselected_tasks")) {
        b.header.unselected_tasks.push_back(TaskId{hash_from_hex(id.get<std::string>())});
    }
    b.header.claimed_accuracy = hdr.at("claimed_accuracy").get<double>();
    b.header.winner_id.bytes = hash_from_hex(hdr.at("winner_id").get<std::string>());
    b.header.model_link = hdr.at("model_link").get<std::string>();

    for (const auto& tx : j.at("transactions")) b.transactions.push_back(from_hex(tx.get<std::string>()));
    for (const auto& t : j.at("confirmed_tasks")) b.confirmed_tasks.push_back(task_from_json_obj(t));
    b.coinbase.publisher_frac = j.at("coinbase").at("publisher_frac").get<double>();
    b.coinbase.miner_frac = j.at("coinbase").at("miner_frac").get<double>();
    if (!j.at("winner_commitment").is_null()) {
        const json& c = j.at("winner_commitment");
        ModelCommitment mc;
        mc.miner_id.bytes = hash_from_hex(c.at("miner_id").get<std::string>());
        mc.task.bytes = hash_from_hex(c.at("task").get<std::string>());
        mc.digest = hash_from_hex(c.at("digest").get<std::string>());
        mc.commit_time = c.at("commit_time").get<double>();
        b.winner_commitment = mc;
    }
    return b;
}

} // namespace dlbc
