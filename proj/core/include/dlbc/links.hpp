// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef DLBC_LINKS_HPP
#define DLBC_LINKS_HPP

#include "dlbc/chain.hpp"
#include "dlbc/dataset.hpp"
#include "dlbc/trainer.hpp"

#include <charconv>
#include <cstdio>
#include <map>
#include <string>

namespace dlbc {

// Tasks carry links, not payloads. A data link fully determines the dataset
// and a model link fully determines the trainer recipe, so any node can
// regenerate both for validation.

struct LinkError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::map<std::string, std::string> parse_query(const std::string& link,
                                                      const std::string& scheme) {
    if (link.rfind(scheme, 0) != 0) throw LinkError("link: expected " + scheme + " in " + link);
    std::map<std::string, std::string> out;
    std::size_t pos = scheme.size();
    while (pos < link.size()) {
        std::size_t eq = link.find('=', pos);
        if (eq == std::string::npos) throw LinkError("link: malformed query in " + link);
        std::size_t amp = link.find('&', eq);
        std::string key = link.substr(pos, eq - pos);
        std::string val = link.substr(eq + 1, (amp == std::string::npos ? link.size() : amp) - eq - 1);
        out[key] = val;
        pos = amp == std::string::npos ? link.size() : amp + 1;
    }
    return out;
}

inline double get_double(const std::map<std::string, std::string>& q, const std::string& key) {
    auto it = q.find(key);
    if (it == q.end()) throw LinkError("link: missing key " + key);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (ec != std::errc() || ptr != it->second.data() + it->second.size()) {
        throw LinkError("link: bad number for " + key);
    }
    return v;
}

inline std::uint64_t get_u64(const std::map<std::string, std::string>& q, const std::string& key) {
    auto it = q.find(key);
    if (it == q.end()) throw LinkError("link: missing key " + key);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (ec != std::errc() || ptr != it->second.data() + it->second.size()) {
        throw LinkError("link: bad integer for " + key);
    }
    return v;
}

} // namespace detail

inline std::string data_link_for(std::uint64_t seed, std::size_t n, std::size_t d, double noise) {
    return "sim-data://v1?seed=" + std::to_string(seed) + "&n=" + std::to_string(n) +
           "&d=" + std::to_string(d) + "&noise=" + detail::fmt_double(noise);
}

inline Dataset dataset_from_link(const std::string& link) {
    auto q = detail::parse_query(link, "sim-data://v1?");
    return make_dataset(detail::get_u64(q, "seed"), detail::get_u64(q, "n"),
                        detail::get_u64(q, "d"), detail::get_double(q, "noise"));
}

inline std::string recipe_link_for(const TrainerConfig& c) {
    return "sim-model://v1?hidden=" + std::to_string(c.hidden_dim) +
           "&lr=" + detail::fmt_double(c.learning_rate) + "&batch=" + std::to_string(c.batch_size) +
           "&epochs=" + std::to_string(c.epochs_budget);
}

/// Trainer recipe from a task's model link. Seed and lambda are not part of
/// the recipe: the seed is per miner, lambda a protocol constant.
inline TrainerConfig config_from_link(const std::string& link, std::uint64_t seed, double lambda) {
    auto q = detail::parse_query(link, "sim-model://v1?");
    TrainerConfig c;
    c.hidden_dim = static_cast<std::uint32_t>(detail::get_u64(q, "hidden"));
    c.learning_rate = detail::get_double(q, "lr");
    c.batch_size = static_cast<std::uint32_t>(detail::get_u64(q, "batch"));
    c.epochs_budget = static_cast<std::uint32_t>(detail::get_u64(q, "epochs"));
    c.seed = seed;
    c.lambda = lambda;
    c.validate();
    return c;
}

} // namespace dlbc

#endif // DLBC_LINKS_HPP
