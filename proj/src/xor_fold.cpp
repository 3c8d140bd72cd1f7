#include "pokforge/xor_fold.hpp"

#include <cmath>
#include <string>

#include "pokforge/errors.hpp"

namespace pokforge {

XorPlan XorPlan::make(std::size_t group_size, std::size_t input_len, Grouping grouping) {
  if (group_size == 0) throw DomainError("group size must be at least 1");
  if (input_len < group_size)
    throw LengthError("input of " + std::to_string(input_len) + " bits is shorter than one group of " +
                      std::to_string(group_size));
  return XorPlan{group_size, input_len, input_len / group_size, grouping};
}

BitString xor_fold(const XorPlan& plan, const BitString& w) {
  if (plan.group_size == 0) throw DomainError("group size must be at least 1");
  if (w.size() < plan.group_size || w.size() != plan.input_len)
    throw LengthError("fold input has " + std::to_string(w.size()) + " bits, plan expects " +
                      std::to_string(plan.input_len));
  const auto& in = w.bits();
  std::vector<std::uint8_t> out(plan.output_len, 0);
  for (std::size_t j = 0; j < plan.output_len; ++j) {
    std::uint8_t acc = 0;
    for (std::size_t i = 0; i < plan.group_size; ++i) {
      const std::size_t idx = plan.grouping == Grouping::consecutive ? j * plan.group_size + i
                                                                     : j + i * plan.output_len;
      acc ^= in[idx];
    }
    out[j] = acc;
  }
  return BitString(std::move(out));
}

BitString xor_fold(std::size_t group_size, const BitString& w) {
  return xor_fold(XorPlan::make(group_size, w.size()), w);
}

double predicted_bias(double p1, std::size_t group_size) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw DomainError("probability outside [0,1]");
  if (group_size == 0) throw DomainError("group size must be at least 1");
  return (1.0 - std::pow(1.0 - 2.0 * p1, static_cast<double>(group_size))) / 2.0;
}

}  // namespace pokforge
