#include "pokforge/bitstring.hpp"

#include <algorithm>

#include "pokforge/bytes.hpp"
#include "pokforge/errors.hpp"

namespace pokforge {

BitString::BitString(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) {
    if (b > 1) throw DomainError("bit value must be 0 or 1");
  }
}

BitString BitString::from_string(std::string_view text) {
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') throw DomainError("bit string may contain only '0' and '1'");
    bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return BitString(std::move(bits));
}

BitString BitString::zeros(std::size_t n) { return BitString(std::vector<std::uint8_t>(n, 0)); }
BitString BitString::ones(std::size_t n) { return BitString(std::vector<std::uint8_t>(n, 1)); }

BitString BitString::from_packed(std::span<const std::uint8_t> bytes, std::size_t nbits) {
  if (bytes.size() != (nbits + 7) / 8) throw FormatError("packed byte count does not match bit length");
  std::vector<std::uint8_t> bits(nbits);
  for (std::size_t i = 0; i < nbits; ++i) bits[i] = (bytes[i / 8] >> (7 - i % 8)) & 1u;
  // pad bits must be zero
  for (std::size_t i = nbits; i < bytes.size() * 8; ++i) {
    if ((bytes[i / 8] >> (7 - i % 8)) & 1u) throw FormatError("non-zero pad bits");
  }
  return BitString(std::move(bits));
}

std::vector<std::uint8_t> BitString::packed() const {
  std::vector<std::uint8_t> out((bits_.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  return out;
}

std::vector<std::uint8_t> BitString::serialize() const {
  if (bits_.size() > UINT32_MAX) throw LengthError("bit string too long to serialize");
  std::vector<std::uint8_t> out;
  put_be(out, bits_.size(), 4);
  put_bytes(out, packed());
  return out;
}

BitString BitString::deserialize_prefix(std::span<const std::uint8_t> bytes, std::size_t& consumed) {
  ByteReader reader(bytes);
  const auto nbits = static_cast<std::size_t>(reader.be(4));
  auto body = reader.take((nbits + 7) / 8);
  consumed = reader.position();
  return from_packed(body, nbits);
}

BitString BitString::deserialize(std::span<const std::uint8_t> bytes) {
  std::size_t consumed = 0;
  BitString b = deserialize_prefix(bytes, consumed);
  if (consumed != bytes.size()) throw FormatError("trailing bytes after bit string");
  return b;
}

int BitString::at(std::size_t i) const {
  if (i >= bits_.size()) throw LengthError("bit index out of range");
  return bits_[i];
}

std::size_t BitString::popcount() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BitString BitString::slice(std::size_t offset, std::size_t length) const {
  if (offset > bits_.size() || length > bits_.size() - offset) throw LengthError("slice out of range");
  return BitString(std::vector<std::uint8_t>(bits_.begin() + static_cast<std::ptrdiff_t>(offset),
                                             bits_.begin() + static_cast<std::ptrdiff_t>(offset + length)));
}

BitString BitString::concat(const BitString& tail) const {
  std::vector<std::uint8_t> out(bits_);
  out.insert(out.end(), tail.bits_.begin(), tail.bits_.end());
  return BitString(std::move(out));
}

BitString BitString::with_flipped(std::size_t i) const {
  if (i >= bits_.size()) throw LengthError("bit index out of range");
  std::vector<std::uint8_t> out(bits_);
  out[i] ^= 1u;
  return BitString(std::move(out));
}

std::string BitString::to_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) s[i] = bits_[i] ? '1' : '0';
  return s;
}

std::size_t hamming_distance(const BitString& a, const BitString& b) {
  if (a.size() != b.size()) throw LengthError("hamming_distance: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]);
  return d;
}

BitString xor_bits(const BitString& a, const BitString& b) {
  if (a.size() != b.size()) throw LengthError("xor: length mismatch");
  std::vector<std::uint8_t> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = static_cast<std::uint8_t>(a[i] ^ b[i]);
  return BitString(std::move(out));
}

BitString random_bits(std::size_t n, double p1, Rng& rng) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw DomainError("random_bits: p1 outside [0,1]");
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = rng.bernoulli(p1) ? 1 : 0;
  return BitString(std::move(out));
}

}  // namespace pokforge
