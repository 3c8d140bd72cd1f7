#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pokforge/errors.hpp"

namespace pokforge {

inline void put_be(std::vector<std::uint8_t>& out, std::uint64_t value, int width) {
  for (int i = width - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

inline void put_bytes(std::vector<std::uint8_t>& out, std::span<const std::uint8_t> bytes) {
  out.insert(out.end(), bytes.begin(), bytes.end());
}

/// Sequential big-endian reader with bounds checks.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint64_t be(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v = (v << 8) | bytes_[pos_++];
    return v;
  }

  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::span<const std::uint8_t> rest() const { return bytes_.subspan(pos_); }
  void skip(std::size_t n) { need(n); pos_ += n; }
  std::size_t position() const noexcept { return pos_; }
  bool done() const noexcept { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("truncated record");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

/// IEEE CRC-32 (zlib polynomial).
std::uint32_t crc32(std::span<const std::uint8_t> bytes);

/// Appends the CRC-32 of everything in `out` as 4 big-endian bytes.
void append_crc32(std::vector<std::uint8_t>& out);

/// Verifies and strips a trailing CRC-32; throws FormatError on mismatch.
std::span<const std::uint8_t> check_crc32(std::span<const std::uint8_t> record);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(const std::string& hex);

}  // namespace pokforge
