#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pokforge/bitstring.hpp"

namespace pokforge {

/// Mean pairwise fractional Hamming distance. Needs at least two equal-length strings.
double intra_distance(std::span<const BitString> reads);
double inter_distance(std::span<const BitString> devices);
/// Largest pairwise fractional distance among the reads.
double max_pairwise_distance(std::span<const BitString> reads);

constexpr std::size_t kMinEntropySamples = 1000;
constexpr std::size_t kMinTestSamples = 100;

/// Most-common-value estimate with a 99 % upper bound on the dominant
/// symbol probability:
///   p = max(f0, f1);  pu = min(1, p + 2.576 sqrt(p (1 - p) / N));  H = -log2(pu)
double mcv_min_entropy(const BitString& bits);

struct RandomnessTests {
  double monobit_z = 0.0;
  bool monobit_pass = false;
  std::size_t runs = 0;
  double runs_z = 0.0;
  bool runs_pass = false;

  friend bool operator==(const RandomnessTests&, const RandomnessTests&) = default;
};

/// Thresholds |z| <= 3.29. The runs statistic is conditional on the symbol
/// counts; if only one symbol occurs it is reported as 0 with runs_pass false.
RandomnessTests monobit_runs(const BitString& bits);

struct PokReport {
  std::size_t n_devices = 0;
  std::size_t n_reads = 0;
  std::size_t n_bits = 0;
  double mean_intra = 0.0;
  double max_intra = 0.0;
  double mean_inter = 0.0;
  std::vector<double> bias;  ///< per bit position, fraction of devices reading 1
  std::optional<double> mcv_min_entropy;
  std::optional<RandomnessTests> tests;

  std::string to_json() const;
  static PokReport from_json(const std::string& text);
  /// "bit,p1" rows.
  std::string bias_csv(const std::string& header_comment = {}) const;

  friend bool operator==(const PokReport&, const PokReport&) = default;
};

/// reads[d][r] is read r of device d. Entropy and randomness tests run on
/// the concatenated first reads and are omitted when too short.
PokReport build_report(const std::vector<std::vector<BitString>>& reads);

}  // namespace pokforge
