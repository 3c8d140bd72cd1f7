#include "pokforge/fuzzy.hpp"

#include <string>

#include "pokforge/bytes.hpp"
#include "pokforge/errors.hpp"

namespace pokforge {

namespace {

// Hamming(7,4) codeword positions 1..7 hold p1 p2 d1 p3 d2 d3 d4, so the
// syndrome of a single error equals its position.
constexpr std::size_t kDataPos[4] = {2, 4, 5, 6};

void encode_hamming(const std::uint8_t* m, std::uint8_t* c) {
  c[2] = m[0];
  c[4] = m[1];
  c[5] = m[2];
  c[6] = m[3];
  c[0] = c[2] ^ c[4] ^ c[6];
  c[1] = c[2] ^ c[5] ^ c[6];
  c[3] = c[4] ^ c[5] ^ c[6];
}

void decode_hamming(const std::uint8_t* r, std::uint8_t* m) {
  std::uint8_t c[7];
  for (int i = 0; i < 7; ++i) c[i] = r[i];
  unsigned syndrome = 0;
  for (unsigned pos = 1; pos <= 7; ++pos)
    if (c[pos - 1]) syndrome ^= pos;
  if (syndrome) c[syndrome - 1] ^= 1;
  for (int i = 0; i < 4; ++i) m[i] = c[kDataPos[i]];
}

}  // namespace

LinearBlockCode LinearBlockCode::repetition(std::size_t n) {
  if (n == 0 || n % 2 == 0 || n > 0xffff)
    throw DomainError("repetition code length must be odd and positive, got " + std::to_string(n));
  return LinearBlockCode(CodeKind::repetition, n, 1, (n - 1) / 2);
}

LinearBlockCode LinearBlockCode::hamming74() { return LinearBlockCode(CodeKind::hamming74, 7, 4, 1); }

LinearBlockCode LinearBlockCode::by_name(std::string_view name) {
  if (name == "hamming74") return hamming74();
  if (name.size() > 3 && name.substr(0, 3) == "rep") {
    std::size_t n = 0;
    for (char ch : name.substr(3)) {
      if (ch < '0' || ch > '9' || n > 0xffff) throw DomainError("unknown code: " + std::string(name));
      n = n * 10 + static_cast<std::size_t>(ch - '0');
    }
    return repetition(n);
  }
  throw DomainError("unknown code: " + std::string(name));
}

LinearBlockCode LinearBlockCode::from_descriptor(CodeKind kind, std::size_t n, std::size_t k,
                                                 std::size_t t) {
  try {
    LinearBlockCode code = [&] {
      switch (kind) {
        case CodeKind::repetition: return repetition(n);
        case CodeKind::hamming74: return hamming74();
        default: throw FormatError("unsupported code id " + std::to_string(static_cast<int>(kind)));
      }
    }();
    if (code.n() != n || code.k() != k || code.t() != t)
      throw FormatError("code descriptor parameters are inconsistent");
    return code;
  } catch (const DomainError& e) {
    throw FormatError(e.what());
  }
}

std::string LinearBlockCode::name() const {
  if (kind_ == CodeKind::hamming74) return "hamming74";
  return "rep" + std::to_string(n_);
}

BitString LinearBlockCode::encode(const BitString& message) const {
  if (message.size() % k_ != 0)
    throw LengthError("message length " + std::to_string(message.size()) +
                      " is not a multiple of k=" + std::to_string(k_));
  const std::size_t blocks = message.size() / k_;
  const auto& m = message.bits();
  std::vector<std::uint8_t> out(blocks * n_);
  for (std::size_t b = 0; b < blocks; ++b) {
    if (kind_ == CodeKind::hamming74) {
      encode_hamming(&m[b * 4], &out[b * 7]);
    } else {
      for (std::size_t i = 0; i < n_; ++i) out[b * n_ + i] = m[b];
    }
  }
  return BitString(std::move(out));
}

BitString LinearBlockCode::decode(const BitString& received) const {
  if (received.size() % n_ != 0)
    throw LengthError("codeword length " + std::to_string(received.size()) +
                      " is not a multiple of n=" + std::to_string(n_));
  const std::size_t blocks = received.size() / n_;
  const auto& r = received.bits();
  std::vector<std::uint8_t> out(blocks * k_);
  for (std::size_t b = 0; b < blocks; ++b) {
    if (kind_ == CodeKind::hamming74) {
      decode_hamming(&r[b * 7], &out[b * 4]);
    } else {
      std::size_t ones = 0;
      for (std::size_t i = 0; i < n_; ++i) ones += r[b * n_ + i];
      out[b] = ones * 2 > n_ ? 1 : 0;
    }
  }
  return BitString(std::move(out));
}

BitString ss_gen(const LinearBlockCode& code, const BitString& w, const BitString& x) {
  if (w.size() % code.n() != 0 || x.size() * code.n() != w.size() * code.k())
    throw LengthError("sketch input lengths do not match the code: |W|=" + std::to_string(w.size()) +
                      " |x|=" + std::to_string(x.size()));
  return xor_bits(w, code.encode(x));
}

BitString rec(const LinearBlockCode& code, const BitString& w_prime, const BitString& h) {
  if (w_prime.size() != h.size())
    throw LengthError("reading length " + std::to_string(w_prime.size()) +
                      " does not match helper length " + std::to_string(h.size()));
  const BitString shifted = xor_bits(w_prime, h);
  return xor_bits(h, code.encode(code.decode(shifted)));
}

BitString pa_hash(const BitString& w, const BitString& s, std::size_t out_len) {
  const std::size_t m = w.size();
  if (out_len == 0) return BitString();
  if (m == 0 || s.size() != out_len + m - 1)
    throw LengthError("hash seed length " + std::to_string(s.size()) + " != " +
                      std::to_string(out_len) + " + " + std::to_string(m) + " - 1");
  const auto& wb = w.bits();
  const auto& sb = s.bits();
  std::vector<std::uint8_t> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    std::uint8_t acc = 0;
    for (std::size_t j = 0; j < m; ++j) acc ^= sb[i + m - 1 - j] & wb[j];
    out[i] = acc;
  }
  return BitString(std::move(out));
}

std::vector<std::uint8_t> HelperData::serialize() const {
  std::vector<std::uint8_t> out = {'P', 'O', 'K', 'H', kVersion, static_cast<std::uint8_t>(code.kind())};
  put_be(out, code.n(), 2);
  put_be(out, code.k(), 2);
  put_be(out, code.t(), 2);
  put_be(out, block_count, 4);
  put_be(out, pa_output_len, 4);
  put_bytes(out, s.serialize());
  put_bytes(out, h.serialize());
  append_crc32(out);
  return out;
}

HelperData HelperData::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader in(check_crc32(bytes));
  auto magic = in.take(4);
  if (std::string(magic.begin(), magic.end()) != "POKH") throw FormatError("not a helper data record");
  if (in.be(1) != kVersion) throw FormatError("unsupported helper data version");
  const auto kind = static_cast<CodeKind>(in.be(1));
  const std::size_t n = in.be(2), k = in.be(2), t = in.be(2);
  HelperData hd;
  hd.code = LinearBlockCode::from_descriptor(kind, n, k, t);
  hd.block_count = in.be(4);
  hd.pa_output_len = in.be(4);
  std::size_t used = 0;
  hd.s = BitString::deserialize_prefix(in.rest(), used);
  in.skip(used);
  hd.h = BitString::deserialize_prefix(in.rest(), used);
  in.skip(used);
  if (!in.done()) throw FormatError("trailing bytes in helper data");
  if (hd.h.size() != hd.code.n() * hd.block_count)
    throw FormatError("sketch length does not match code and block count");
  if (hd.pa_output_len > 0 && hd.s.size() != hd.pa_output_len + hd.h.size() - 1)
    throw FormatError("hash seed length does not match output length");
  if (hd.pa_output_len == 0 && !hd.s.empty()) throw FormatError("hash seed present without output");
  return hd;
}

GenOutput fe_gen(const LinearBlockCode& code, const BitString& w, std::size_t out_len, Rng& rng) {
  if (w.empty() || w.size() % code.n() != 0)
    throw LengthError("reading length " + std::to_string(w.size()) + " is not a positive multiple of n=" +
                      std::to_string(code.n()));
  const std::size_t blocks = w.size() / code.n();
  const BitString x = random_bits(blocks * code.k(), 0.5, rng);

  const std::size_t m = w.size();
  BitString s;
  if (out_len > 0) {
    for (;;) {
      s = random_bits(out_len + m - 1, 0.5, rng);
      // Row i of the Toeplitz matrix reads s[i .. i+m-1]; reject if any is all zero.
      const auto& sb = s.bits();
      std::size_t run = 0;
      bool zero_row = false;
      for (std::size_t i = 0; i < sb.size() && !zero_row; ++i) {
        run = sb[i] ? 0 : run + 1;
        zero_row = run >= m;
      }
      if (!zero_row) break;
    }
  }

  GenOutput out;
  out.helper.code = code;
  out.helper.block_count = blocks;
  out.helper.pa_output_len = out_len;
  out.helper.h = ss_gen(code, w, x);
  out.helper.s = s;
  out.key = pa_hash(w, s, out_len);
  return out;
}

BitString fe_rep(const BitString& w_prime, const HelperData& helper) {
  if (w_prime.size() != helper.h.size())
    throw LengthError("reading length " + std::to_string(w_prime.size()) +
                      " does not match helper length " + std::to_string(helper.h.size()));
  return pa_hash(rec(helper.code, w_prime, helper.h), helper.s, helper.pa_output_len);
}

}  // namespace pokforge
