// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef DLBC_SIMNET_HPP
#define DLBC_SIMNET_HPP

#include "dlbc/consensus.hpp"
#include "dlbc/scenario.hpp"
#include "dlbc/stream_cipher.hpp"

#include <functional>
#include <optional>
#include <variant>

namespace dlbc {

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- protocol messages ---------------------------------------------------------

struct MsgTaskSubmit {
    Task task;
};
struct MsgEncryptedData {
    TaskId task;
    Bytes ciphertext;
    std::uint64_t sim_size = 0; // declared transfer size (task.data_size)
};
struct MsgKeyRelease {
    TaskId task;
    StreamKey key{};
};
struct MsgCommitment {
    ModelCommitment commitment;
};
struct MsgTestRelease {
    TaskId task;
};
struct MsgCandidate {
    Candidate candidate;
};
struct MsgBlock {
    Block block;
};

using Payload = std::variant<MsgTaskSubmit, MsgEncryptedData, MsgKeyRelease, MsgCommitment,
                             MsgTestRelease, MsgCandidate, MsgBlock>;

/// Timestamped message in the deterministic event queue; total order is
/// (deliver_at, seq) with seq assigned at scheduling time.
struct SimEvent {
    double deliver_at = 0.0;
    std::uint64_t seq = 0;
    AgentId from;
    AgentId to;
    Payload payload;
};

/// Message transfer time under the per-link delay model.
double transfer_delay(double latency, double bandwidth, std::uint64_t payload_bytes);

// --- report ---------------------------------------------------------------------

struct SimBlockRow {
    std::uint64_t height = 0;
    bool idle = true;
    std::string winner;       // agent name, empty when idle
    std::string selected_task; // hex id, zeros when idle
    double accuracy = 0.0;
    double publisher_frac = 0.0;
    double miner_frac = 1.0;
    std::uint64_t queue_len = 0; // queue length at this block's selection
    std::uint32_t candidates = 0;
    std::string rejections;   // "name:reason|name:reason"
    double training_s = 0.0;  // winner's simulated training time
    double overhead_s = 0.0;  // simulated signature+transfer overhead
};

struct ForkOutcome {
    bool fork_won = false;
    std::size_t honest_high = 0;
    std::size_t fork_high = 0;
    double honest_cumulative = 0.0;
    double fork_cumulative = 0.0;
};

struct SimReport {
    std::vector<SimBlockRow> rows;
    std::optional<ForkOutcome> fork;
    std::uint32_t commitments_accepted = 0;
    std::uint32_t commitments_late = 0;

    std::string to_csv() const;
};

struct SimResult {
    SimReport report;
    ChainView chain;
    std::optional<ChainView> fork_chain;
    ProtocolParams protocol;
};

/// Runs the full scenario: a pure function of the config (plus the store
/// directory contents it writes). All full nodes are asserted byte-identical
/// after every block.
SimResult run(const ScenarioConfig& config, ModelStore& store);

} // namespace dlbc

#endif // DLBC_SIMNET_HPP
