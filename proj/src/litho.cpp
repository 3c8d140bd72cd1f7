#include "pokforge/litho.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "pokforge/errors.hpp"
#include "pokforge/rng.hpp"

namespace pokforge {

double yield_probability(const YieldSurface& surface, double length_nm, double width_nm) {
  if (!(length_nm > 0.0) || !(width_nm > 0.0)) throw DomainError("design dimensions must be positive");
  if (!(surface.spread > 0.0)) throw DomainError("yield spread must be positive");
  const double w50 = surface.w50_at_lref + surface.dw50_dl * (length_nm - surface.lref);
  return 1.0 / (1.0 + std::exp(-(width_nm - w50) / surface.spread));
}

LithoArray::LithoArray(LithoDesign design, std::uint64_t seed, std::vector<std::uint8_t> connected)
    : design_(design), seed_(seed), connected_(std::move(connected)) {
  if (connected_.size() != design_.rows * design_.cols) throw LengthError("cell count does not match array shape");
}

BitString LithoArray::read_bits() const { return BitString(connected_); }

namespace {

std::vector<std::uint8_t> sample_cells(double p, double p_void, std::size_t n, Rng& rng) {
  std::vector<std::uint8_t> cells(n);
  for (auto& c : cells) {
    const bool printed = rng.bernoulli(p);
    // the void draw is always consumed so streams do not depend on p_void
    const bool voided = rng.bernoulli(p_void);
    c = (printed && !voided) ? 1 : 0;
  }
  return cells;
}

}  // namespace

LithoArray fabricate_array(const YieldSurface& surface, const LithoDesign& design, std::uint64_t seed) {
  if (design.rows * design.cols == 0) throw DomainError("array needs at least one cell");
  if (design.p_void < 0.0 || design.p_void > 1.0) throw DomainError("p_void outside [0,1]");
  const double p = yield_probability(surface, design.length_nm, design.width_nm);
  Rng rng(seed);
  return LithoArray(design, seed, sample_cells(p, design.p_void, design.rows * design.cols, rng));
}

std::vector<double> design_range(double lo, double hi, double step) {
  if (!(step > 0.0)) throw DomainError("range step must be positive");
  if (!(lo > 0.0)) throw DomainError("design dimensions must be positive");
  if (hi < lo) throw DomainError("empty design range");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

YieldMap build_yield_map(const YieldSurface& surface, const YieldMapRequest& request, std::uint64_t seed) {
  if (request.cells_per_group == 0 || request.dies == 0) throw DomainError("yield map needs cells and dies");
  YieldMap map;
  map.widths = design_range(request.w_min, request.w_max, request.w_step);
  map.lengths = design_range(request.l_min, request.l_max, request.l_step);
  map.yield.reserve(map.widths.size() * map.lengths.size());
  const std::size_t samples = request.cells_per_group * request.dies;
  std::uint64_t group = 0;
  for (double w : map.widths) {
    for (double l : map.lengths) {
      Rng rng(derive_seed(seed, group++));
      const auto cells = sample_cells(yield_probability(surface, l, w), request.p_void, samples, rng);
      std::size_t ok = 0;
      for (auto c : cells) ok += c;
      map.yield.push_back(static_cast<double>(ok) / static_cast<double>(samples));
    }
  }
  return map;
}

std::string YieldMap::to_csv(const std::string& header_comment) const {
  std::ostringstream os;
  if (!header_comment.empty()) os << "# " << header_comment << "\n";
  char buf[64];
  os << "W\\L";
  for (double l : lengths) {
    std::snprintf(buf, sizeof buf, ",%g", l);
    os << buf;
  }
  os << '\n';
  for (std::size_t i = 0; i < widths.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%g", widths[i]);
    os << buf;
    for (std::size_t j = 0; j < lengths.size(); ++j) {
      std::snprintf(buf, sizeof buf, ",%.4f", at(i, j));
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace pokforge
