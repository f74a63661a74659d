// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "dlbc/model_store.hpp"

#include "dlbc/sha256.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace dlbc {

namespace fs = std::filesystem;

ModelStore::ModelStore(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_ / "models");
}

fs::path ModelStore::run_dir(const std::string& ref) const { return root_ / "models" / ref; }

std::string ModelStore::put_run(const std::vector<Checkpoint>& checkpoints) {
    if (checkpoints.empty()) throw StoreError("put_run: no checkpoints");
    Bytes final_bytes = serialize_model(checkpoints.back().weights);
    std::string ref = to_hex(sha256(ByteSpan(final_bytes.data(), final_bytes.size())));

    fs::path dir = run_dir(ref);
    fs::create_directories(dir);

    std::ostringstream index;
    for (const Checkpoint& ck : checkpoints) {
        std::string digest_hex = to_hex(ck.digest);
        index << ck.epoch << ' ' << digest_hex << '\n';

        std::ofstream f(dir / (digest_hex + ".ckpt"), std::ios::binary);
        if (!f) throw StoreError("put_run: cannot write checkpoint file");
        f << "epoch " << ck.epoch << " digest " << digest_hex << " train_loss ";
        f.precision(17);
        f << ck.train_loss << '\n';
        Bytes w = serialize_model(ck.weights);
        f.write(reinterpret_cast<const char*>(w.data()), static_cast<std::streamsize>(w.size()));
    }
    std::ofstream idx(dir / "checkpoints.txt", std::ios::binary);
    if (!idx) throw StoreError("put_run: cannot write index");
    idx << index.str();
    return ref;
}

bool ModelStore::has_run(const std::string& ref) const {
    return fs::exists(run_dir(ref) / "checkpoints.txt");
}

std::vector<Hash256> ModelStore::checkpoint_digests(const std::string& ref) const {
    std::ifstream idx(run_dir(ref) / "checkpoints.txt");
    if (!idx) throw StoreError("checkpoint_digests: missing run " + ref);
    std::vector<Hash256> out;
    std::uint64_t epoch;
    std::string hex;
    while (idx >> epoch >> hex) out.push_back(hash_from_hex(hex));
    if (out.empty()) throw StoreError("checkpoint_digests: empty index for " + ref);
    return out;
}

Checkpoint ModelStore::load_checkpoint(const std::string& ref, const Hash256& digest) const {
    fs::path file = run_dir(ref) / (to_hex(digest) + ".ckpt");
    std::ifstream f(file, std::ios::binary);
    if (!f) throw StoreError("load_checkpoint: missing " + file.string());

    std::string header;
    std::getline(f, header);
    std::istringstream hs(header);
    std::string tag_epoch, tag_digest, tag_loss, digest_hex;
    Checkpoint ck;
    hs >> tag_epoch >> ck.epoch >> tag_digest >> digest_hex >> tag_loss >> ck.train_loss;
    if (tag_epoch != "epoch" || tag_digest != "digest" || tag_loss != "train_loss") {
        throw StoreError("load_checkpoint: malformed header in " + file.string());
    }

    Bytes raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    ck.weights = deserialize_model(ByteSpan(raw.data(), raw.size()));
    ck.digest = hash_from_hex(digest_hex);
    return ck;
}

ModelWeights ModelStore::load_final(const std::string& ref) const {
    std::vector<Hash256> digests = checkpoint_digests(ref);
    return load_checkpoint(ref, digests.back()).weights;
}

std::string model_link_for(const std::string& ref, std::uint64_t trainer_seed) {
    return "store://models/" + ref + "?seed=" + std::to_string(trainer_seed);
}

std::pair<std::string, std::uint64_t> parse_model_link(const std::string& link) {
    const std::string prefix = "store://models/";
    if (link.rfind(prefix, 0) != 0) throw StoreError("parse_model_link: bad scheme in " + link);
    std::size_t q = link.find("?seed=");
    if (q == std::string::npos) throw StoreError("parse_model_link: missing seed in " + link);
    std::string ref = link.substr(prefix.size(), q - prefix.size());
    std::uint64_t seed = 0;
    const char* first = link.data() + q + 6;
    const char* last = link.data() + link.size();
    auto [ptr, ec] = std::from_chars(first, last, seed);
    if (ec != std::errc() || ptr != last) throw StoreError("parse_model_link: bad seed in " + link);
    return {ref, seed};
}

} // namespace dlbc
