#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pokforge/rng.hpp"

namespace pokforge {

/// Fixed-length bit vector. Length and contents are fixed at construction;
/// operations return new values.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::vector<std::uint8_t> bits);
  /// Parses a string of '0'/'1' characters.
  static BitString from_string(std::string_view text);
  static BitString zeros(std::size_t n);
  static BitString ones(std::size_t n);

  /// Packed MSB-first bytes, trailing pad bits zero (no length header).
  static BitString from_packed(std::span<const std::uint8_t> bytes, std::size_t nbits);
  std::vector<std::uint8_t> packed() const;

  /// 4-byte big-endian bit length followed by packed bits.
  std::vector<std::uint8_t> serialize() const;
  static BitString deserialize(std::span<const std::uint8_t> bytes);
  /// Reads one serialized string from the front of `bytes`, returning how
  /// many bytes it consumed through `consumed`.
  static BitString deserialize_prefix(std::span<const std::uint8_t> bytes,
                                      std::size_t& consumed);

  std::size_t size() const noexcept { return bits_.size(); }
  bool empty() const noexcept { return bits_.empty(); }
  int operator[](std::size_t i) const { return bits_[i]; }
  int at(std::size_t i) const;
  std::size_t popcount() const noexcept;

  BitString slice(std::size_t offset, std::size_t length) const;
  BitString concat(const BitString& tail) const;
  BitString with_flipped(std::size_t i) const;

  std::string to_string() const;
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Number of positions where a and b differ. Throws LengthError on mismatch.
std::size_t hamming_distance(const BitString& a, const BitString& b);

BitString xor_bits(const BitString& a, const BitString& b);

/// n independent draws, each 1 with probability p1.
BitString random_bits(std::size_t n, double p1, Rng& rng);

}  // namespace pokforge
