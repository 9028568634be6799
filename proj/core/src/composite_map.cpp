#include "nmkl/composite_map.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nmkl/error.hpp"

namespace nmkl {
namespace {

constexpr double kTotalTol = 1e-12;
constexpr int kMaxBisections = 200;

double excess(std::span<const double> a, double step_lambda, double total) {
  double s = 0.0;
  for (double aj : a) s += std::max(0.0, aj - step_lambda * total);
  return s - total;
}

}  // namespace

// Stationarity of the magnitude problem: t_j - a_j + step_lambda * T = 0 for
// t_j > 0, and a_j <= step_lambda * T for t_j = 0, i.e.
//   t_j = [a_j - step_lambda T]_+,   T = sum_j t_j.
// Hence the shrink factor is s_j = [1 - step_lambda T / a_j]_+ where T solves
//   sum_j [a_j - step_lambda T]_+ = T.
// Writing the factor with a multiplier mu as [1 - step_lambda mu / (2 a_j)]_+
// is only consistent if mu = 2T; pairing that factor with mu = sum_j t_j
// under-shrinks by a factor of two and does not satisfy the conditions above.
GroupShrinkage group_shrinkage(std::span<const double> norms, double step_lambda) {
  if (!(step_lambda > 0.0)) throw ArgumentError("group_shrinkage: step_lambda must be positive");
  for (double aj : norms) {
    if (!(aj >= 0.0) || !std::isfinite(aj)) throw ArgumentError("group_shrinkage: norms must be finite and >= 0");
  }
  GroupShrinkage out;
  out.factors.assign(norms.size(), 0.0);
  const double sum_a = std::accumulate(norms.begin(), norms.end(), 0.0);
  if (sum_a <= 0.0) return out;

  // h(T) = sum_j [a_j - step_lambda T]_+ - T is strictly decreasing with
  // h(0) = sum_a > 0 and h(sum_a) <= 0.
  double lo = 0.0;
  double hi = sum_a;
  for (int it = 0; it < kMaxBisections && hi - lo > kTotalTol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (excess(norms, step_lambda, mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double total = 0.5 * (lo + hi);

  // Polish: on the active set A = {a_j > step_lambda T}, T = sum_A a_j / (1 + |A| step_lambda).
  double active_sum = 0.0;
  int active = 0;
  for (double aj : norms) {
    if (aj > step_lambda * total) {
      active_sum += aj;
      ++active;
    }
  }
  const double exact = active_sum / (1.0 + active * step_lambda);
  bool consistent = true;
  for (double aj : norms) {
    if ((aj > step_lambda * total) != (aj > step_lambda * exact)) consistent = false;
  }
  if (consistent) total = exact;

  out.total = total;
  for (std::size_t j = 0; j < norms.size(); ++j) {
    if (norms[j] > 0.0) out.factors[j] = std::max(0.0, 1.0 - step_lambda * total / norms[j]);
  }
  return out;
}

CompositeResult composite_map(const PrimalState& f_hat, double step_lambda) {
  const Eigen::Index m = f_hat.coef.cols();
  std::vector<double> norms(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) norms[j] = std::sqrt(f_hat.norm_sq(j));
  CompositeResult result{f_hat, group_shrinkage(norms, step_lambda)};
  for (Eigen::Index j = 0; j < m; ++j) {
    const double s = result.shrinkage.factors[static_cast<std::size_t>(j)];
    if (s == 0.0) {
      result.state.coef.col(j).setZero();
      result.state.kcoef.col(j).setZero();
    } else {
      result.state.coef.col(j) *= s;
      result.state.kcoef.col(j) *= s;
    }
  }
  return result;
}

}  // namespace nmkl
