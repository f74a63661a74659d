// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef DLBC_CHAIN_HPP
#define DLBC_CHAIN_HPP

#include "dlbc/bytes.hpp"
#include "dlbc/serialize.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dlbc {

/// A published training job. Sizes and FLOP count feed the difficulty
/// formulas; links point at the data and model recipe instead of payloads.
struct Task {
    AgentId publisher_id;
    std::uint64_t reward = 0;       // currency units
    std::string model_link;         // model recipe URI
    std::string data_link;          // training data URI
    std::uint64_t model_size = 0;   // bytes
    std::uint64_t data_size = 0;    // bytes
    double flops = 0.0;             // floating-point ops per epoch
    double submit_time = 0.0;       // simulated seconds

    bool well_formed() const {
        return reward > 0 && model_size > 0 && data_size > 0 && flops > 0.0;
    }
};

/// Flat weight vector with a pinned bit-exact encoding.
struct ModelWeights {
    std::vector<double> weights;

    std::size_t dim() const { return weights.size(); }
    bool operator==(const ModelWeights&) const = default;
};

/// Hash commitment binding (model, miner, task) before test-set release.
struct ModelCommitment {
    AgentId miner_id;
    TaskId task;
    Hash256 digest{};
    double commit_time = 0.0;

    bool operator==(const ModelCommitment&) const = default;
};

struct BlockHeader {
    std::uint64_t height = 0;
    Hash256 prev_digest{};
    Hash256 data_digest{};
    double timestamp = 0.0;
    Hash256 model_signature{};      // digest over model bytes ‖ data id ‖ task info
    TaskId selected_task;           // zero id on idle blocks
    std::vector<TaskId> unselected_tasks;
    double claimed_accuracy = 0.0;  // in [0,1]
    AgentId winner_id;              // zero id on idle blocks
    std::string model_link;

    bool is_idle() const { return winner_id.bytes == kZeroHash; }
};

/// Block-reward division between task publisher and winning miner.
struct CoinbaseSplit {
    double publisher_frac = 0.0;
    double miner_frac = 1.0;

    bool operator==(const CoinbaseSplit&) const = default;
};

struct Block {
    BlockHeader header;
    std::vector<Bytes> transactions;     // opaque payloads
    std::vector<Task> confirmed_tasks;
    CoinbaseSplit coinbase;
    /// Accepted commitment of the winning miner; absent on idle blocks.
    std::optional<ModelCommitment> winner_commitment;
};

// --- model encoding -------------------------------------------------------

/// Bit-exact model encoding: dim as u64 LE, then each weight as binary64 LE.
/// Throws SerializeError on non-finite weights.
Bytes serialize_model(const ModelWeights& w);
ModelWeights deserialize_model(ByteSpan data);

/// Commitment digest: SHA-256(serialize(weights) ‖ miner_id ‖ task).
ModelCommitment model_commitment(const ModelWeights& w, const AgentId& miner, const TaskId& task,
                                 double commit_time = 0.0);

// --- task encoding --------------------------------------------------------

/// Canonical content bytes (identity fields; excludes submit_time so a
/// resubmitted task deduplicates to the same id).
Bytes task_content_bytes(const Task& t);
TaskId task_id(const Task& t);

Bytes serialize_task(const Task& t);
Task deserialize_task(ByteReader& r);

// --- header / block encoding ----------------------------------------------

Bytes serialize_header(const BlockHeader& h);
BlockHeader deserialize_header(ByteReader& r);

/// SHA-256 over the canonical header bytes. Structural invariants are
/// enforced first: accuracy range, selected not listed among unselected,
/// no duplicate unselected ids.
Hash256 block_digest(const BlockHeader& h);

Bytes serialize_block_body(const Block& b);
/// SHA-256 over the canonical body bytes (transactions, confirmed tasks,
/// coinbase, winner commitment).
Hash256 body_digest(const Block& b);

Bytes serialize_block(const Block& b);
Block deserialize_block(ByteSpan data);

// --- chain dump (JSON lines, hex digests) ----------------------------------

std::string block_to_json(const Block& b);
Block block_from_json(const std::string& line);

} // namespace dlbc

#endif // DLBC_CHAIN_HPP
