#include <doctest.h>

#include <string>

#include "pokforge/bitstring.hpp"
#include "pokforge/bytes.hpp"
#include "pokforge/errors.hpp"

using namespace pokforge;

namespace {

// Character-wise reference for Hamming distance.
std::size_t count_diff(const std::string& a, const std::string& b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

}  // namespace

TEST_CASE("hamming distance and xor") {
  CHECK(hamming_distance(BitString::from_string("1010"), BitString::from_string("1001")) == 2);
  CHECK(xor_bits(BitString::from_string("110"), BitString::from_string("011")) == BitString::from_string("101"));
  CHECK(hamming_distance(BitString(), BitString()) == 0);
  CHECK_THROWS_AS(hamming_distance(BitString::from_string("1"), BitString::from_string("10")), LengthError);
  CHECK_THROWS_AS(xor_bits(BitString::from_string("1"), BitString::from_string("10")), LengthError);

  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(70);
    const BitString a = random_bits(n, 0.5, rng), b = random_bits(n, 0.5, rng);
    CHECK(hamming_distance(a, b) == count_diff(a.to_string(), b.to_string()));
    CHECK(hamming_distance(a, b) == xor_bits(a, b).popcount());
    CHECK(xor_bits(xor_bits(a, b), b) == a);
  }
}

TEST_CASE("construction rejects non-binary input") {
  CHECK_THROWS_AS(BitString::from_string("102"), DomainError);
  CHECK_THROWS_AS(BitString(std::vector<std::uint8_t>{0, 2}), DomainError);
  CHECK(BitString::zeros(5).popcount() == 0);
  CHECK(BitString::ones(5).popcount() == 5);
}

TEST_CASE("slicing and concatenation") {
  const BitString a = BitString::from_string("110010");
  CHECK(a.slice(1, 3) == BitString::from_string("100"));
  CHECK(a.slice(0, 2).concat(a.slice(2, 4)) == a);
  CHECK(a.with_flipped(0) == BitString::from_string("010010"));
  CHECK_THROWS(a.slice(4, 3));
}

TEST_CASE("packed serialization") {
  const BitString a = BitString::from_string("1011001");
  const auto ser = a.serialize();
  REQUIRE(ser.size() == 5);
  CHECK(ser[0] == 0);
  CHECK(ser[3] == 7);
  CHECK(ser[4] == 0xB2);  // 1011 0010, pad bit zero
  CHECK(BitString::deserialize(ser) == a);

  auto bad = ser;
  bad[4] |= 1;  // nonzero pad
  CHECK_THROWS_AS(BitString::deserialize(bad), FormatError);
  CHECK_THROWS_AS(BitString::deserialize(std::vector<std::uint8_t>{0, 0, 0, 9, 0xff}), FormatError);

  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const BitString x = random_bits(rng.below(100), 0.5, rng);
    CHECK(BitString::deserialize(x.serialize()) == x);
  }
  CHECK(BitString::deserialize(BitString().serialize()).empty());
}

TEST_CASE("random bits are seeded and validate probability") {
  Rng a(42), b(42);
  CHECK(random_bits(64, 0.5, a) == random_bits(64, 0.5, b));
  CHECK_THROWS_AS(random_bits(4, 1.5, a), DomainError);
  CHECK(random_bits(100, 0.0, a).popcount() == 0);
  CHECK(random_bits(100, 1.0, a).popcount() == 100);
}

TEST_CASE("crc32 and hex") {
  const std::string check = "123456789";
  CHECK(crc32(std::span(reinterpret_cast<const std::uint8_t*>(check.data()), check.size())) == 0xCBF43926u);
  std::vector<std::uint8_t> rec = {1, 2, 3};
  append_crc32(rec);
  CHECK(check_crc32(rec).size() == 3);
  rec[1] ^= 0x10;
  CHECK_THROWS_AS(check_crc32(rec), FormatError);
  CHECK(to_hex(std::vector<std::uint8_t>{0x00, 0xab, 0x7f}) == "00ab7f");
  CHECK(from_hex("00AB7f") == std::vector<std::uint8_t>{0x00, 0xab, 0x7f});
  CHECK_THROWS(from_hex("abc"));
}
