// Copyright (c) 2026 The DLBC developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef DLBC_SERIALIZE_HPP
#define DLBC_SERIALIZE_HPP

#include "dlbc/bytes.hpp"

#include <bit>
#include <cstring>
#include <string>
#include <string_view>

namespace dlbc {

struct SerializeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Canonical wire encoding: length-prefixed, field-ordered, little-endian.

class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    void raw(ByteSpan data) { buf_.insert(buf_.end(), data.begin(), data.end()); }

    void hash(const Hash256& h) { raw(ByteSpan(h.data(), h.size())); }

    /// u64 length prefix followed by the bytes.
    void blob(ByteSpan data) {
        u64(data.size());
        raw(data);
    }

    void str(std::string_view s) {
        u64(s.size());
        buf_.insert(buf_.end(), s.begin(), s.end());
    }

    const Bytes& bytes() const { return buf_; }
    Bytes take() { return std::move(buf_); }

private:
    Bytes buf_;
};

class ByteReader {
public:
    explicit ByteReader(ByteSpan data) : data_(data) {}

    std::uint8_t u8() {
        need(1);
        return data_[pos_++];
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    Hash256 hash() {
        need(32);
        Hash256 h;
        std::memcpy(h.data(), data_.data() + pos_, 32);
        pos_ += 32;
        return h;
    }

    Bytes blob() {
        std::uint64_t n = u64();
        need(n);
        Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
        pos_ += n;
        return out;
    }

    std::string str() {
        std::uint64_t n = u64();
        need(n);
        std::string out(reinterpret_cast<const char*>(data_.data() + pos_), n);
        pos_ += n;
        return out;
    }

    bool done() const { return pos_ == data_.size(); }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    void need(std::uint64_t n) const {
        if (n > data_.size() - pos_) throw SerializeError("byte reader: truncated input");
    }

    ByteSpan data_;
    std::size_t pos_ = 0;
};

} // namespace dlbc

#endif // DLBC_SERIALIZE_HPP
