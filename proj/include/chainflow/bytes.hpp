#ifndef CHAINFLOW_BYTES_HPP
#define CHAINFLOW_BYTES_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chainflow/error.hpp"

namespace chainflow {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline std::string to_hex(ByteView data) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0f]);
  }
  return out;
}

inline Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) throw Error(ErrorCode::Malformed, "odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(ErrorCode::Malformed, "invalid hex character");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

/// Appends fixed-width big-endian integers and u32-length-prefixed blobs.
class ByteWriter {
 public:
  ByteWriter& u8(std::uint8_t v) {
    buf_.push_back(v);
    return *this;
  }
  ByteWriter& u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    return *this;
  }
  ByteWriter& u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    return *this;
  }
  ByteWriter& i64(std::int64_t v) { return u64(static_cast<std::uint64_t>(v)); }
  ByteWriter& boolean(bool v) { return u8(v ? 1 : 0); }
  ByteWriter& raw(ByteView data) {
    buf_.insert(buf_.end(), data.begin(), data.end());
    return *this;
  }
  ByteWriter& blob(ByteView data) {
    u32(static_cast<std::uint32_t>(data.size()));
    return raw(data);
  }
  ByteWriter& str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
    return *this;
  }
  template <std::size_t N>
  ByteWriter& fixed(const std::array<std::uint8_t, N>& a) {
    return raw(ByteView(a.data(), a.size()));
  }

  const Bytes& bytes() const& { return buf_; }
  Bytes bytes() && { return std::move(buf_); }

 private:
  Bytes buf_;
};

/// Strict reader over a canonical encoding. Any short read or invalid
/// discriminant throws Error(Malformed).
class ByteReader {
 public:
  explicit ByteReader(ByteView data) : data_(data) {}

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_++];
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_++];
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  bool boolean() {
    auto v = u8();
    if (v > 1) throw Error(ErrorCode::Malformed, "boolean byte out of range");
    return v == 1;
  }
  Bytes blob() {
    auto n = u32();
    need(n);
    Bytes out(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
              data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
  }
  std::string str() {
    auto n = u32();
    need(n);
    std::string out(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return out;
  }
  template <std::size_t N>
  std::array<std::uint8_t, N> fixed() {
    need(N);
    std::array<std::uint8_t, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = data_[pos_++];
    return out;
  }
  /// Reads a u32 element count and rejects counts that cannot fit in the
  /// remaining input given a minimum per-element size.
  std::uint32_t count(std::size_t min_element_size = 1) {
    auto n = u32();
    if (min_element_size > 0 && n > remaining() / min_element_size)
      throw Error(ErrorCode::Malformed, "element count exceeds remaining input");
    return n;
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }
  void expect_done() const {
    if (!done()) throw Error(ErrorCode::Malformed, "trailing bytes after record");
  }

 private:
  void need(std::size_t n) const {
    if (n > data_.size() - pos_) throw Error(ErrorCode::Malformed, "unexpected end of record");
  }

  ByteView data_;
  std::size_t pos_ = 0;
};

}  // namespace chainflow

#endif  // CHAINFLOW_BYTES_HPP
