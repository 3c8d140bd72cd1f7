#pragma once

#include <cstddef>
#include <cstdint>

#include "pokforge/bitstring.hpp"

namespace pokforge {

enum class Grouping : std::uint8_t {
  consecutive = 0,  // output j folds inputs [j*g, (j+1)*g)
  strided = 1,      // output j folds inputs j, j+L, j+2L, ... with L = output_len
};

struct XorPlan {
  std::size_t group_size = 1;
  std::size_t input_len = 0;
  std::size_t output_len = 0;
  Grouping grouping = Grouping::consecutive;

  /// output_len = input_len / group_size; leftover input bits are dropped.
  static XorPlan make(std::size_t group_size, std::size_t input_len,
                      Grouping grouping = Grouping::consecutive);

  friend bool operator==(const XorPlan&, const XorPlan&) = default;
};

/// Throws LengthError if |w| differs from plan.input_len or is shorter than one group.
BitString xor_fold(const XorPlan& plan, const BitString& w);
BitString xor_fold(std::size_t group_size, const BitString& w);

/// P(output = 1) for g independent Bernoulli(p1) inputs: (1 - (1-2 p1)^g) / 2.
double predicted_bias(double p1, std::size_t group_size);

}  // namespace pokforge
