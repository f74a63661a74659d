// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "dlbc/dataset.hpp"

#include "dlbc/rng.hpp"
#include "dlbc/serialize.hpp"
#include "dlbc/sha256.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dlbc {

static constexpr double kClusterNorm = 0.05; // euclidean length of each class center

Dataset make_dataset(std::uint64_t seed, std::size_t n, std::size_t d, double noise) {
    if (n < 4) throw std::invalid_argument("make_dataset: need n >= 4 for a train/test split");
    if (d < 1) throw std::invalid_argument("make_dataset: need d >= 1");
    if (noise < 0.0) throw std::invalid_argument("make_dataset: negative noise");

    Dataset ds;
    ds.n = n;
    ds.d = d;
    ds.seed = seed;
    ds.inputs.resize(n * d);
    ds.labels.resize(n);

    DetRng rng(mix64(seed, 0xda7a5e7));
    const double center = kClusterNorm / std::sqrt(static_cast<double>(d));
    for (std::size_t i = 0; i < n; ++i) {
        std::uint8_t label = static_cast<std::uint8_t>(i & 1);
        ds.labels[i] = label;
        double sign = label ? 1.0 : -1.0;
        for (std::size_t j = 0; j < d; ++j) {
            ds.inputs[i * d + j] = sign * center + noise * rng.gaussian();
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    DetRng split_rng(mix64(seed, 0x5917));
    split_rng.shuffle(order);
    std::size_t train_n = (n * 8) / 10;
    ds.train_idx.assign(order.begin(), order.begin() + train_n);
    ds.test_idx.assign(order.begin() + train_n, order.end());
    return ds;
}

Bytes serialize_dataset(const Dataset& ds) {
    ByteWriter out;
    out.u64(ds.n);
    out.u64(ds.d);
    out.u64(ds.seed);
    for (double v : ds.inputs) out.f64(v);
    for (std::uint8_t l : ds.labels) out.u8(l);
    out.u64(ds.train_idx.size());
    for (std::size_t i : ds.train_idx) out.u64(i);
    out.u64(ds.test_idx.size());
    for (std::size_t i : ds.test_idx) out.u64(i);
    return out.take();
}

Dataset deserialize_dataset(ByteSpan data) {
    ByteReader r(data);
    Dataset ds;
    ds.n = r.u64();
    ds.d = r.u64();
    ds.seed = r.u64();
    ds.inputs.resize(ds.n * ds.d);
    for (double& v : ds.inputs) v = r.f64();
    ds.labels.resize(ds.n);
    for (std::uint8_t& l : ds.labels) l = r.u8();
    ds.train_idx.resize(r.u64());
    for (std::size_t& i : ds.train_idx) i = r.u64();
    ds.test_idx.resize(r.u64());
    for (std::size_t& i : ds.test_idx) i = r.u64();
    if (!r.done()) throw SerializeError("deserialize_dataset: trailing bytes");
    return ds;
}

Hash256 dataset_digest(const Dataset& ds) {
    Bytes raw = serialize_dataset(ds);
    return sha256(ByteSpan(raw.data(), raw.size()));
}

} // namespace dlbc
