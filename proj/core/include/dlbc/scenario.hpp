// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef DLBC_SCENARIO_HPP
#define DLBC_SCENARIO_HPP

#include "dlbc/consensus.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace dlbc {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Role { publisher, miner, fullnode };

enum class Behavior {
    honest,
    thief,         // steals a Phase 3 candidate and resubmits it
    withholder,    // delays its commitment past the deadline
    accuracy_liar, // claims more accuracy than the model has
    forker,        // mines a private fork with its compute share
};

struct AgentSpec {
    std::string name;
    AgentId id;           // sha256(name)
    Role role = Role::miner;
    double compute_share = 0.0;
    double clock_skew = 0.0;  // seconds, |skew| <= 5
    Behavior behavior = Behavior::honest;
    double bandwidth = 0.0;   // bytes/s; 0 means the network median
    double latency = 0.05;    // seconds
};

/// Recipe publishers stamp onto generated tasks.
struct TaskDefaults {
    std::size_t d = 64;
    std::size_t dataset_n = 1000;
    double noise = 0.02;
    std::uint32_t hidden = 0;
    double lr = 800.0;
    std::uint32_t batch = 2;
    std::uint32_t epochs_cap = 40;
    std::uint64_t model_size = 2'000'000;
    std::uint64_t data_size = 8'000'000;
    double flops = 2e10;
    std::uint64_t reward_min = 5;
    std::uint64_t reward_max = 50;
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    std::uint32_t num_blocks = 5;
    ProtocolParams protocol;
    std::vector<AgentSpec> agents;
    TaskDefaults task_defaults;
    std::uint32_t tasks_per_block = 1;
    std::uint32_t initial_tasks = 2;
    std::uint32_t tx_per_block = 2;
    double commit_safety_margin = 12.0; // honest miners stop this early

    void validate() const;
    std::size_t miner_count() const;
    std::size_t fullnode_count() const;
};

AgentId agent_id_from_name(const std::string& name);

ScenarioConfig scenario_from_json(const std::string& text);
std::string scenario_to_json(const ScenarioConfig& config);

// --- chain dump I/O -----------------------------------------------------------

struct DumpError : std::runtime_error {
    DumpError(std::string msg, std::size_t line_no)
        : std::runtime_error(std::move(msg)), line(line_no) {}
    std::size_t line;
};

/// First line carries the protocol parameters, then one block per line.
void write_chain_dump(std::ostream& out, const ProtocolParams& params, const ChainView& chain);
struct ChainDump {
    ProtocolParams params;
    ChainView chain;
};
ChainDump read_chain_dump(std::istream& in);

} // namespace dlbc

#endif // DLBC_SCENARIO_HPP
