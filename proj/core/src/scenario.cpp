// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "dlbc/scenario.hpp"

#include "dlbc/sha256.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <istream>
#include <ostream>

namespace dlbc {

using nlohmann::json;

AgentId agent_id_from_name(const std::string& name) {
    return AgentId{sha256(ByteSpan(reinterpret_cast<const std::uint8_t*>(name.data()), name.size()))};
}

void ScenarioConfig::validate() const {
    protocol.validate();
    if (num_blocks == 0) throw ConfigError("scenario: num_blocks must be positive");
    if (fullnode_count() == 0) throw ConfigError("scenario: need at least one full node");
    double share_sum = 0.0;
    for (const AgentSpec& a : agents) {
        if (a.name.empty()) throw ConfigError("scenario: agent without a name");
        if (std::abs(a.clock_skew) > 5.0) throw ConfigError("scenario: |clock_skew| must be <= 5 s");
        if (a.role == Role::miner) {
            if (a.compute_share <= 0.0) throw ConfigError("scenario: miner needs compute_share > 0");
            share_sum += a.compute_share;
        }
        if (a.bandwidth < 0.0 || a.latency < 0.0) throw ConfigError("scenario: negative link spec");
    }
    if (share_sum > 1.0 + 1e-9) throw ConfigError("scenario: compute shares exceed 1");
    if (task_defaults.reward_min == 0 || task_defaults.reward_min > task_defaults.reward_max) {
        throw ConfigError("scenario: bad reward range");
    }
    if (task_defaults.d < 1) throw ConfigError("scenario: bad d");
    std::size_t dim = task_defaults.hidden == 0
                          ? task_defaults.d
                          : static_cast<std::size_t>(task_defaults.hidden) * (task_defaults.d + 1);
    if (dim < protocol.wm.n) throw ConfigError("scenario: model too small for the watermark");
    if (commit_safety_margin <= 10.0) {
        throw ConfigError("scenario: commit margin must exceed worst-case skew");
    }
}

std::size_t ScenarioConfig::miner_count() const {
    std::size_t n = 0;
    for (const AgentSpec& a : agents) n += a.role == Role::miner;
    return n;
}

std::size_t ScenarioConfig::fullnode_count() const {
    std::size_t n = 0;
    for (const AgentSpec& a : agents) n += a.role == Role::fullnode;
    return n;
}

namespace {

Role role_from_string(const std::string& s) {
    if (s == "publisher") return Role::publisher;
    if (s == "miner") return Role::miner;
    if (s == "fullnode") return Role::fullnode;
    throw ConfigError("scenario: unknown role " + s);
}

std::string role_to_string(Role r) {
    switch (r) {
        case Role::publisher: return "publisher";
        case Role::miner: return "miner";
        case Role::fullnode: return "fullnode";
    }
    return "?";
}

Behavior behavior_from_string(const std::string& s) {
    if (s == "honest") return Behavior::honest;
    if (s == "thief") return Behavior::thief;
    if (s == "withholder") return Behavior::withholder;
    if (s == "accuracy_liar") return Behavior::accuracy_liar;
    if (s == "forker") return Behavior::forker;
    throw ConfigError("scenario: unknown behavior " + s);
}

std::string behavior_to_string(Behavior b) {
    switch (b) {
        case Behavior::honest: return "honest";
        case Behavior::thief: return "thief";
        case Behavior::withholder: return "withholder";
        case Behavior::accuracy_liar: return "accuracy_liar";
        case Behavior::forker: return "forker";
    }
    return "?";
}

json protocol_to_json(const ProtocolParams& p) {
    return json{
        {"phases", {{"p1", p.phases.p1}, {"p2", p.phases.p2}, {"p3", p.phases.p3}}},
        {"ranking", {{"k", p.ranking.k}, {"L", p.ranking.L}}},
        {"stats",
         {{"median_bandwidth", p.stats.median_bandwidth}, {"median_compute", p.stats.median_compute}}},
        {"wm",
         {{"n", p.wm.n}, {"m", p.wm.m}, {"lambda", p.wm.lambda}, {"threshold", p.wm.threshold}}},
        {"fork_threshold", p.fork_threshold},
        {"max_pool_tasks", p.max_pool_tasks},
    };
}

ProtocolParams protocol_from_json(const json& j) {
    ProtocolParams p;
    if (j.contains("phases")) {
        p.phases.p1 = j.at("phases").value("p1", p.phases.p1);
        p.phases.p2 = j.at("phases").value("p2", p.phases.p2);
        p.phases.p3 = j.at("phases").value("p3", p.phases.p3);
    }
    if (j.contains("ranking")) {
        p.ranking.k = j.at("ranking").value("k", p.ranking.k);
        p.ranking.L = j.at("ranking").value("L", p.ranking.L);
    }
    if (j.contains("stats")) {
        p.stats.median_bandwidth = j.at("stats").value("median_bandwidth", p.stats.median_bandwidth);
        p.stats.median_compute = j.at("stats").value("median_compute", p.stats.median_compute);
    }
    if (j.contains("wm")) {
        p.wm.n = j.at("wm").value("n", p.wm.n);
        p.wm.m = j.at("wm").value("m", p.wm.m);
        p.wm.lambda = j.at("wm").value("lambda", p.wm.lambda);
        p.wm.threshold = j.at("wm").value("threshold", p.wm.threshold);
    }
    p.fork_threshold = j.value("fork_threshold", p.fork_threshold);
    p.max_pool_tasks = j.value("max_pool_tasks", p.max_pool_tasks);
    return p;
}

} // namespace

ScenarioConfig scenario_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario: bad JSON: ") + e.what());
    }
    try {
        ScenarioConfig c;
        c.seed = j.value("seed", c.seed);
        c.num_blocks = j.value("num_blocks", c.num_blocks);
        if (j.contains("protocol")) c.protocol = protocol_from_json(j.at("protocol"));
        c.tasks_per_block = j.value("tasks_per_block", c.tasks_per_block);
        c.initial_tasks = j.value("initial_tasks", c.initial_tasks);
        c.tx_per_block = j.value("tx_per_block", c.tx_per_block);
        c.commit_safety_margin = j.value("commit_safety_margin", c.commit_safety_margin);

        if (j.contains("task_defaults")) {
            const json& t = j.at("task_defaults");
            TaskDefaults& d = c.task_defaults;
            d.d = t.value("d", d.d);
            d.dataset_n = t.value("dataset_n", d.dataset_n);
            d.noise = t.value("noise", d.noise);
            d.hidden = t.value("hidden", d.hidden);
            d.lr = t.value("lr", d.lr);
            d.batch = t.value("batch", d.batch);
            d.epochs_cap = t.value("epochs_cap", d.epochs_cap);
            d.model_size = t.value("model_size", d.model_size);
            d.data_size = t.value("data_size", d.data_size);
            d.flops = t.value("flops", d.flops);
            d.reward_min = t.value("reward_min", d.reward_min);
            d.reward_max = t.value("reward_max", d.reward_max);
        }

        for (const json& a : j.value("agents", json::array())) {
            AgentSpec spec;
            spec.name = a.at("name").get<std::string>();
            spec.id = agent_id_from_name(spec.name);
            spec.role = role_from_string(a.at("role").get<std::string>());
            spec.compute_share = a.value("compute_share", spec.compute_share);
            spec.clock_skew = a.value("clock_skew", spec.clock_skew);
            spec.behavior = behavior_from_string(a.value("behavior", std::string("honest")));
            spec.bandwidth = a.value("bandwidth", spec.bandwidth);
            spec.latency = a.value("latency", spec.latency);
            c.agents.push_back(std::move(spec));
        }
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario: bad config: ") + e.what());
    }
}

std::string scenario_to_json(const ScenarioConfig& c) {
    json agents = json::array();
    for (const AgentSpec& a : c.agents) {
        agents.push_back(json{{"name", a.name},
                              {"role", role_to_string(a.role)},
                              {"compute_share", a.compute_share},
                              {"clock_skew", a.clock_skew},
                              {"behavior", behavior_to_string(a.behavior)},
                              {"bandwidth", a.bandwidth},
                              {"latency", a.latency}});
    }
    const TaskDefaults& d = c.task_defaults;
    json j{{"seed", c.seed},
           {"num_blocks", c.num_blocks},
           {"protocol", protocol_to_json(c.protocol)},
           {"tasks_per_block", c.tasks_per_block},
           {"initial_tasks", c.initial_tasks},
           {"tx_per_block", c.tx_per_block},
           {"commit_safety_margin", c.commit_safety_margin},
           {"task_defaults",
            {{"d", d.d},
             {"dataset_n", d.dataset_n},
             {"noise", d.noise},
             {"hidden", d.hidden},
             {"lr", d.lr},
             {"batch", d.batch},
             {"epochs_cap", d.epochs_cap},
             {"model_size", d.model_size},
             {"data_size", d.data_size},
             {"flops", d.flops},
             {"reward_min", d.reward_min},
             {"reward_max", d.reward_max}}},
           {"agents", agents}};
    return j.dump(2);
}

void write_chain_dump(std::ostream& out, const ProtocolParams& params, const ChainView& chain) {
    out << json{{"protocol", protocol_to_json(params)}}.dump() << '\n';
    for (const Block& b : chain.blocks) out << block_to_json(b) << '\n';
}

ChainDump read_chain_dump(std::istream& in) {
    ChainDump dump;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw DumpError("chain dump: empty file", 0);
    ++line_no;
    try {
        json j = json::parse(line);
        dump.params = protocol_from_json(j.at("protocol"));
    } catch (const json::exception& e) {
        throw DumpError(std::string("chain dump: bad protocol line: ") + e.what(), line_no);
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            dump.chain.blocks.push_back(block_from_json(line));
        } catch (const std::exception& e) {
            throw DumpError(std::string("chain dump: bad block: ") + e.what(), line_no);
        }
    }
    if (dump.chain.blocks.empty()) throw DumpError("chain dump: no blocks", line_no);
    return dump;
}

} // namespace dlbc
