#include <doctest.h>

#include <cmath>

#include "pokforge/errors.hpp"
#include "pokforge/litho.hpp"
#include "pokforge/metrics.hpp"

using namespace pokforge;

namespace {

// Exact binomial probability P(lo <= X <= hi) for X ~ Bin(n, p).
double binomial_range(int n, double p, int lo, int hi) {
  double sum = 0.0;
  for (int k = lo; k <= hi; ++k) {
    const double log_term = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                            k * std::log(p) + (n - k) * std::log1p(-p);
    sum += std::exp(log_term);
  }
  return sum;
}

LithoDesign design(std::size_t rows, std::size_t cols, double length, double width) {
  LithoDesign d;
  d.rows = rows;
  d.cols = cols;
  d.length_nm = length;
  d.width_nm = width;
  return d;
}

}  // namespace

TEST_CASE("yield surface") {
  const YieldSurface s;
  CHECK(yield_probability(s, 460, 52) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(yield_probability(s, 460, 54) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));
  CHECK(yield_probability(s, 460, 54) == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(yield_probability(s, 460, 200) > 0.999999);
  CHECK_THROWS_AS(yield_probability(s, 0, 52), DomainError);
  CHECK_THROWS_AS(yield_probability(s, 460, -1), DomainError);

  for (double l = 300; l <= 600; l += 25)
    for (double w = 40; w <= 64; w += 1.5) {
      const double p = yield_probability(s, l, w);
      CHECK(p > 0.0);
      CHECK(p < 1.0);
      CHECK(yield_probability(s, l, w + 0.1) > p);
      CHECK(yield_probability(s, l + 1.0, w) <= p);
    }
}

TEST_CASE("fabrication and reads") {
  const YieldSurface s;
  const LithoArray none = fabricate_array(s, design(4, 8, 460, 1), 1);
  CHECK(none.read_bits().popcount() == 0);
  const LithoArray all = fabricate_array(s, design(4, 8, 460, 400), 1);
  CHECK(all.read_bits().popcount() == 32);

  const LithoArray a = fabricate_array(s, design(16, 32, 460, 52), 9);
  CHECK(a.read_bits() == a.read_bits());
  CHECK(a.read_bits() == fabricate_array(s, design(16, 32, 460, 52), 9).read_bits());
  CHECK(a.read_bits()[5] == (a.connected(0, 5) ? 1 : 0));

  // Empirical fraction converges to the yield probability.
  std::size_t ones = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto bits = fabricate_array(s, design(16, 32, 460, 53), seed).read_bits();
    ones += bits.popcount();
    total += bits.size();
  }
  const double p = yield_probability(s, 460, 53);
  CHECK(std::fabs(double(ones) / double(total) - p) <= 4.0 * std::sqrt(p * (1 - p) / double(total)));
}

TEST_CASE("void formation only breaks connected cells") {
  const YieldSurface s;
  LithoDesign d = design(16, 32, 460, 400);
  d.p_void = 0.25;
  const auto bits = fabricate_array(s, d, 4).read_bits();
  const double frac = double(bits.popcount()) / double(bits.size());
  CHECK(std::fabs(frac - 0.75) <= 4.0 * std::sqrt(0.75 * 0.25 / 512.0));
}

TEST_CASE("distinct devices are unique") {
  const YieldSurface s;
  std::vector<BitString> devs;
  for (std::uint64_t seed = 100; seed < 130; ++seed)
    devs.push_back(fabricate_array(s, design(8, 16, 460, 52), seed).read_bits());
  // 435 pairs of 128 bits at p = 0.5: mean distance 0.5, pairwise sd 0.044
  CHECK(inter_distance(devs) == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("yield map") {
  const YieldSurface s;
  const YieldMapRequest req;
  const YieldMap map = build_yield_map(s, req, 7);
  CHECK(map.widths.size() == 13);
  CHECK(map.lengths.size() == 31);
  for (double y : map.yield) {
    CHECK(y >= 0.0);
    CHECK(y <= 1.0);
  }
  CHECK(map.to_csv() == build_yield_map(s, req, 7).to_csv());
  const std::string csv = map.to_csv("note");
  CHECK(csv.rfind("# note\nW\\L,300,310", 0) == 0);
  CHECK(csv.find("\n52,") != std::string::npos);

  YieldSurface never = s;
  never.w50_at_lref = 10000;
  for (double y : build_yield_map(never, req, 7).yield) CHECK(y == 0.0);

  YieldMapRequest empty = req;
  empty.w_min = 70;
  CHECK_THROWS_AS(build_yield_map(s, empty, 1), DomainError);
  CHECK_THROWS_AS(design_range(1, 2, 0), DomainError);
}

TEST_CASE("binomial band for 100 cells at the calibration point") {
  const double p_band = binomial_range(100, 0.5, 40, 60);
  CHECK(p_band == doctest::Approx(0.965).epsilon(0.002));
  int inside = 0;
  const YieldSurface s;
  for (std::uint64_t e = 0; e < 200; ++e) {
    const auto bits = fabricate_array(s, design(10, 10, 460, 52), 5000 + e).read_bits();
    inside += bits.popcount() >= 40 && bits.popcount() <= 60;
  }
  const double sd = std::sqrt(p_band * (1 - p_band) / 200.0);
  CHECK(std::fabs(inside / 200.0 - p_band) <= 4 * sd);
}
