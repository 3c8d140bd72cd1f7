#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pokforge/bitstring.hpp"

namespace pokforge {

/// Connectivity yield of a two-contact line cell as a function of its
/// design length L and width W (both nm):
///   p(L, W) = 1 / (1 + exp(-(W - W50(L)) / spread))
///   W50(L)  = w50_at_lref + dw50_dl * (L - lref)
/// The defaults put the 50 % point at L = 460 nm, W = 52 nm.
struct YieldSurface {
  double w50_at_lref = 52.0;
  double lref = 460.0;
  double dw50_dl = 0.01;
  double spread = 2.0;
};

double yield_probability(const YieldSurface& surface, double length_nm, double width_nm);

struct LithoDesign {
  std::size_t rows = 16;
  std::size_t cols = 32;
  double length_nm = 460.0;
  double width_nm = 52.0;
  /// Probability that a connected cell breaks from void formation after
  /// annealing.
  double p_void = 0.0;
};

/// Line-cell array. Connectivity is decided once at fabrication.
class LithoArray {
 public:
  LithoArray(LithoDesign design, std::uint64_t seed, std::vector<std::uint8_t> connected);

  const LithoDesign& design() const noexcept { return design_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t size() const noexcept { return connected_.size(); }
  bool connected(std::size_t row, std::size_t col) const { return connected_.at(row * design_.cols + col) != 0; }

  /// Bit i (row-major) is 1 iff cell i conducts.
  BitString read_bits() const;

 private:
  LithoDesign design_;
  std::uint64_t seed_;
  std::vector<std::uint8_t> connected_;
};

LithoArray fabricate_array(const YieldSurface& surface, const LithoDesign& design, std::uint64_t seed);

/// Fraction of connected cells per (W, L) design group.
struct YieldMap {
  std::vector<double> widths;   ///< row labels, nm
  std::vector<double> lengths;  ///< column labels, nm
  std::vector<double> yield;    ///< row-major, widths.size() x lengths.size()

  double at(std::size_t w_index, std::size_t l_index) const { return yield[w_index * lengths.size() + l_index]; }

  /// Header row "W\L,<lengths...>", then one row per width; yields with
  /// four decimals.
  std::string to_csv(const std::string& header_comment = {}) const;
};

struct YieldMapRequest {
  double w_min = 40.0;
  double w_max = 64.0;
  double w_step = 2.0;
  double l_min = 300.0;
  double l_max = 600.0;
  double l_step = 10.0;
  std::size_t cells_per_group = 10;
  std::size_t dies = 10;
  double p_void = 0.0;
};

/// Inclusive grid of design points. Throws DomainError on an empty range or
/// non-positive step or dimension.
std::vector<double> design_range(double lo, double hi, double step);

YieldMap build_yield_map(const YieldSurface& surface, const YieldMapRequest& request, std::uint64_t seed);

}  // namespace pokforge
