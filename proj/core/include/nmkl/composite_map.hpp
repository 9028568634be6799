#pragma once

#include <span>
#include <vector>

#include "nmkl/saddle.hpp"

namespace nmkl {

// Solution of the magnitude problem
//   min_{t >= 0}  1/2 sum_j (t_j - a_j)^2 + (step_lambda / 2) (sum_j t_j)^2
// given block norms a_j >= 0.
struct GroupShrinkage {
  double total = 0.0;           // T = sum_j t_j
  std::vector<double> factors;  // t_j / a_j, zero when a_j == 0
};

GroupShrinkage group_shrinkage(std::span<const double> norms, double step_lambda);

struct CompositeResult {
  PrimalState state;
  GroupShrinkage shrinkage;
};

// Composite gradient mapping
//   argmin_f 1/2 sum_j |f_j - f_hat_j|^2 + (step_lambda / 2) (sum_j |f_j|)^2.
// The minimiser keeps each block's direction, f_j = s_j f_hat_j, so only the
// magnitudes need solving. Uses and updates the K_j C_j cache of `f_hat`.
CompositeResult composite_map(const PrimalState& f_hat, double step_lambda);

}  // namespace nmkl
