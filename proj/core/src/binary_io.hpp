#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nts/error.hpp"

namespace nts::detail {

class ByteWriter {
 public:
  void raw(std::string_view s) { raw(s.data(), s.size()); }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <class T>
  void le(T v) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    raw(buf, sizeof(T));
  }
  void u32(std::uint32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void f64(double v) { le(v); }
  std::vector<unsigned char>& bytes() { return out_; }

 private:
  std::vector<unsigned char> out_;
};

/// Throws `E` with a short message on truncation.
template <class E>
class ByteReader {
 public:
  explicit ByteReader(std::span<const unsigned char> in) : in_(in) {}
  void raw(void* p, std::size_t n) {
    if (pos_ + n > in_.size()) throw E("truncated data at byte " + std::to_string(pos_));
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  template <class T>
  T le() {
    unsigned char buf[sizeof(T)];
    raw(buf, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
  }
  void skip(std::size_t n) {
    if (pos_ + n > in_.size()) throw E("truncated data at byte " + std::to_string(pos_));
    pos_ += n;
  }
  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::uint64_t u64() { return le<std::uint64_t>(); }
  double f64() { return le<double>(); }
  bool done() const { return pos_ == in_.size(); }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const unsigned char> in_;
  std::size_t pos_ = 0;
};

}  // namespace nts::detail
