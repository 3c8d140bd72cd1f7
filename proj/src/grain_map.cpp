#include "pokforge/grain_map.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "pokforge/errors.hpp"
#include "pokforge/rng.hpp"

namespace pokforge {

std::size_t GrainMap::boundary_count() const {
  return static_cast<std::size_t>(std::count(boundary.begin(), boundary.end(), std::uint8_t{1}));
}

namespace {

void derive_boundary(GrainMap& m) {
  m.boundary.assign(m.rows * m.cols, 0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      const int g = m.grain[m.index(r, c)];
      const bool edge = (r > 0 && m.grain[m.index(r - 1, c)] != g) ||
                        (r + 1 < m.rows && m.grain[m.index(r + 1, c)] != g) ||
                        (c > 0 && m.grain[m.index(r, c - 1)] != g) ||
                        (c + 1 < m.cols && m.grain[m.index(r, c + 1)] != g);
      m.boundary[m.index(r, c)] = edge ? 1 : 0;
    }
  }
}

}  // namespace

GrainMap grain_map_from_nuclei(std::size_t rows, std::size_t cols, std::vector<Nucleus> nuclei) {
  if (rows == 0 || cols == 0) throw DomainError("grain map needs a non-empty grid");
  if (nuclei.empty()) throw DomainError("grain map needs at least one nucleus");
  for (const auto& n : nuclei) {
    if (n.row >= rows || n.col >= cols) throw DomainError("nucleus outside grid");
  }
  GrainMap m;
  m.rows = rows;
  m.cols = cols;
  m.nuclei = std::move(nuclei);
  m.grain.assign(rows * cols, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      long best = std::numeric_limits<long>::max();
      int owner = 0;
      for (std::size_t k = 0; k < m.nuclei.size(); ++k) {
        const long dr = static_cast<long>(r) - static_cast<long>(m.nuclei[k].row);
        const long dc = static_cast<long>(c) - static_cast<long>(m.nuclei[k].col);
        const long d2 = dr * dr + dc * dc;
        if (d2 < best) {
          best = d2;
          owner = static_cast<int>(k);
        }
      }
      m.grain[m.index(r, c)] = owner;
    }
  }
  derive_boundary(m);
  return m;
}

GrainMap generate_grain_map(std::size_t rows, std::size_t cols, double nucleation_density,
                            std::uint64_t seed) {
  if (rows < 8 || cols < 8) throw DomainError("grain map needs at least 8 x 8 cells");
  if (!(nucleation_density > 0.0 && nucleation_density < 1.0)) {
    throw DomainError("nucleation density must lie in (0, 1)");
  }
  Rng rng(seed);
  std::vector<Nucleus> nuclei;
  while (nuclei.size() < 2) {
    nuclei.clear();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        if (rng.bernoulli(nucleation_density)) nuclei.push_back({r, c});
      }
    }
  }
  GrainMap m = grain_map_from_nuclei(rows, cols, std::move(nuclei));
  m.seed = seed;
  return m;
}

GrainMap mirrored(const GrainMap& map) {
  GrainMap m = map;
  for (auto& n : m.nuclei) n.col = map.cols - 1 - n.col;
  for (std::size_t r = 0; r < map.rows; ++r) {
    for (std::size_t c = 0; c < map.cols; ++c) {
      m.grain[m.index(r, c)] = map.grain[map.index(r, map.cols - 1 - c)];
      m.boundary[m.index(r, c)] = map.boundary[map.index(r, map.cols - 1 - c)];
    }
  }
  return m;
}

std::string to_pgm(const GrainMap& map, const std::string& comment) {
  std::ostringstream os;
  os << "P2\n";
  if (!comment.empty()) os << "# " << comment << "\n";
  os << map.cols << ' ' << map.rows << '\n' << (map.nuclei.empty() ? 0 : map.nuclei.size() - 1) << '\n';
  for (std::size_t r = 0; r < map.rows; ++r) {
    for (std::size_t c = 0; c < map.cols; ++c) {
      if (c) os << ' ';
      os << map.grain[map.index(r, c)];
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace pokforge
