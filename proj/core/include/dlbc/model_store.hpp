// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef DLBC_MODEL_STORE_HPP
#define DLBC_MODEL_STORE_HPP

#include "dlbc/trainer.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace dlbc {

struct StoreError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Content-addressed checkpoint storage standing in for model links. A run is
/// keyed by the hex digest of its final weights; each checkpoint file carries
/// a text header (epoch, digest hex) followed by the serialized weights.
class ModelStore {
public:
    explicit ModelStore(std::filesystem::path root);

    /// Persists a full checkpoint trail; returns the run reference
    /// (hex digest of the final model weights).
    std::string put_run(const std::vector<Checkpoint>& checkpoints);

    bool has_run(const std::string& ref) const;

    /// Epoch-ordered checkpoint digests of a stored run.
    std::vector<Hash256> checkpoint_digests(const std::string& ref) const;

    Checkpoint load_checkpoint(const std::string& ref, const Hash256& digest) const;

    /// Weights of the run's last checkpoint.
    ModelWeights load_final(const std::string& ref) const;

    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path run_dir(const std::string& ref) const;
    std::filesystem::path root_;
};

/// Reference carried in block headers: "store://models/<ref>?seed=<u64>".
std::string model_link_for(const std::string& ref, std::uint64_t trainer_seed);
/// Parses a model link back into (ref, trainer seed). Throws StoreError.
std::pair<std::string, std::uint64_t> parse_model_link(const std::string& link);

} // namespace dlbc

#endif // DLBC_MODEL_STORE_HPP
