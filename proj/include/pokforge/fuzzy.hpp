#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pokforge/bitstring.hpp"
#include "pokforge/rng.hpp"

namespace pokforge {

enum class CodeKind : std::uint8_t { repetition = 0x01, hamming74 = 0x02, bch = 0x03 };

/// Binary linear block code applied blockwise. Shipped codes: repetition-n
/// (odd n) and Hamming(7,4).
class LinearBlockCode {
 public:
  static LinearBlockCode repetition(std::size_t n);
  static LinearBlockCode hamming74();
  /// "rep3", "rep5", "repN" or "hamming74".
  static LinearBlockCode by_name(std::string_view name);
  /// Rebuilds a code from its serialized descriptor; FormatError if unknown
  /// or inconsistent.
  static LinearBlockCode from_descriptor(CodeKind kind, std::size_t n, std::size_t k, std::size_t t);

  CodeKind kind() const noexcept { return kind_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t k() const noexcept { return k_; }
  std::size_t t() const noexcept { return t_; }
  std::string name() const;

  /// Length must be a multiple of k.
  BitString encode(const BitString& message) const;
  /// Length must be a multiple of n. Nearest-codeword decoding per block.
  BitString decode(const BitString& received) const;

  friend bool operator==(const LinearBlockCode&, const LinearBlockCode&) = default;

 private:
  LinearBlockCode(CodeKind kind, std::size_t n, std::size_t k, std::size_t t)
      : kind_(kind), n_(n), k_(k), t_(t) {}
  CodeKind kind_;
  std::size_t n_, k_, t_;
};

/// Code-offset sketch: h = W xor encode(x).
BitString ss_gen(const LinearBlockCode& code, const BitString& w, const BitString& x);

/// h xor encode(decode(W' xor h)).
BitString rec(const LinearBlockCode& code, const BitString& w_prime, const BitString& h);

/// Toeplitz hash over GF(2): k[i] = XOR_j s[i - j + m - 1] & W[j], m = |W|.
/// Requires |s| = out_len + |W| - 1.
BitString pa_hash(const BitString& w, const BitString& s, std::size_t out_len);

/// Public enrollment record of the fuzzy extractor.
struct HelperData {
  static constexpr std::uint8_t kVersion = 0x01;

  LinearBlockCode code = LinearBlockCode::repetition(3);
  std::size_t block_count = 0;
  std::size_t pa_output_len = 0;
  BitString s;
  BitString h;

  std::vector<std::uint8_t> serialize() const;
  static HelperData deserialize(std::span<const std::uint8_t> bytes);

  friend bool operator==(const HelperData&, const HelperData&) = default;
};

struct GenOutput {
  HelperData helper;
  BitString key;
};

/// Draws x and s from rng (s redrawn while the Toeplitz matrix has an
/// all-zero row), returns the public helper data and the secret key.
GenOutput fe_gen(const LinearBlockCode& code, const BitString& w, std::size_t out_len, Rng& rng);

BitString fe_rep(const BitString& w_prime, const HelperData& helper);

}  // namespace pokforge
