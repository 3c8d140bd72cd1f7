#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace pokforge {

struct Nucleus {
  std::size_t row;
  std::size_t col;
};

/// Polycrystalline partition of a rows x cols grid. Each cell carries the
/// id of its nearest nucleus (squared Euclidean distance between cell
/// centres, ties to the lowest nucleus index); a cell is a grain-boundary
/// cell when any 4-neighbour belongs to a different grain.
struct GrainMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Nucleus> nuclei;
  std::vector<int> grain;             ///< row-major grain ids, 0..nuclei.size()-1
  std::vector<std::uint8_t> boundary; ///< row-major mask
  std::uint64_t seed = 0;

  std::size_t index(std::size_t r, std::size_t c) const { return r * cols + c; }
  std::size_t grain_count() const { return nuclei.size(); }
  std::size_t boundary_count() const;
};

/// Voronoi tessellation from explicit nuclei.
GrainMap grain_map_from_nuclei(std::size_t rows, std::size_t cols, std::vector<Nucleus> nuclei);

/// Each site nucleates independently with probability `nucleation_density`
/// (Bernoulli thinning of the lattice, i.e. a discrete Poisson process).
/// Draws with fewer than two nuclei are repeated from the same stream.
/// Requires rows, cols >= 8 and 0 < density < 1.
GrainMap generate_grain_map(std::size_t rows, std::size_t cols, double nucleation_density,
                            std::uint64_t seed);

/// Left-right reflection; nuclei keep their indices.
GrainMap mirrored(const GrainMap& map);

/// Plain-text PGM (P2) with grain ids as gray levels.
std::string to_pgm(const GrainMap& map, const std::string& comment = {});

}  // namespace pokforge
