#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "nmkl/error.hpp"
#include "nmkl/polytope.hpp"

namespace nmkl {
namespace {

constexpr double kEtaTol = 1e-12;
constexpr int kMaxBisections = 200;

double clipped_sum(const Eigen::Ref<const Eigen::VectorXd>& a_hat,
                   const Eigen::Ref<const Eigen::VectorXd>& caps, double eta) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a_hat.size(); ++i) {
    s += std::clamp(a_hat(i) - eta, 0.0, caps(i));
  }
  return s;
}

Eigen::VectorXd clip_shifted(const Eigen::Ref<const Eigen::VectorXd>& a_hat,
                             const Eigen::Ref<const Eigen::VectorXd>& caps, double eta) {
  Eigen::VectorXd out(a_hat.size());
  for (Eigen::Index i = 0; i < a_hat.size(); ++i) {
    out(i) = std::clamp(a_hat(i) - eta, 0.0, caps(i));
  }
  return out;
}

double eta_bisection(const Eigen::Ref<const Eigen::VectorXd>& a_hat,
                     const Eigen::Ref<const Eigen::VectorXd>& caps, double rho) {
  double lo = 0.0;
  double hi = a_hat.maxCoeff();
  for (int it = 0; it < kMaxBisections && hi - lo > kEtaTol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (clipped_sum(a_hat, caps, mid) > rho) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

// g(eta) = sum_i clip(a_hat_i - eta, 0, cap_i) is piecewise linear and
// non-increasing with kinks at a_hat_i - cap_i (coordinate leaves its cap,
// slope -1) and a_hat_i (coordinate reaches zero, slope +1). Walk the kinks
// right of zero until g drops to rho, then interpolate.
double eta_sorted(const Eigen::Ref<const Eigen::VectorXd>& a_hat,
                  const Eigen::Ref<const Eigen::VectorXd>& caps, double rho) {
  std::vector<std::pair<double, int>> events;
  events.reserve(static_cast<std::size_t>(2 * a_hat.size()));
  double slope = 0.0;
  for (Eigen::Index i = 0; i < a_hat.size(); ++i) {
    const double upper_kink = a_hat(i) - caps(i);
    const double lower_kink = a_hat(i);
    if (lower_kink <= 0.0) continue;  // stays at zero for every eta >= 0
    if (upper_kink <= 0.0) {
      slope -= 1.0;
    } else {
      events.emplace_back(upper_kink, -1);
    }
    events.emplace_back(lower_kink, +1);
  }
  std::sort(events.begin(), events.end());

  double cur = 0.0;
  double g = clipped_sum(a_hat, caps, 0.0);
  for (const auto& [pos, delta] : events) {
    const double g_next = g + slope * (pos - cur);
    if (g_next <= rho) return cur + (g - rho) / (-slope);
    g = g_next;
    cur = pos;
    slope += delta;
  }
  return cur;
}

void check_inputs(const Eigen::Ref<const Eigen::VectorXd>& a_hat,
                  const Eigen::Ref<const Eigen::VectorXd>& caps, double rho) {
  if (a_hat.size() != caps.size()) {
    throw ArgumentError("project_dual: alpha and caps have different lengths");
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ArgumentError("project_dual: rho must be positive");
  if ((caps.array() < 0.0).any()) throw ArgumentError("project_dual: caps must be non-negative");
  if (!a_hat.allFinite()) throw ArgumentError("project_dual: non-finite input");
}

}  // namespace

DualProjection project_dual_detailed(const Eigen::Ref<const Eigen::VectorXd>& alpha_hat,
                                     const Eigen::Ref<const Eigen::VectorXd>& caps, double rho,
                                     ProjectionMethod method) {
  check_inputs(alpha_hat, caps, rho);
  if (clipped_sum(alpha_hat, caps, 0.0) <= rho) {
    return {clip_shifted(alpha_hat, caps, 0.0), 0.0};
  }
  const double eta = method == ProjectionMethod::kBisection ? eta_bisection(alpha_hat, caps, rho)
                                                            : eta_sorted(alpha_hat, caps, rho);
  return {clip_shifted(alpha_hat, caps, eta), eta};
}

Eigen::VectorXd project_dual(const Eigen::Ref<const Eigen::VectorXd>& alpha_hat,
                             const Eigen::Ref<const Eigen::VectorXd>& caps, double rho,
                             ProjectionMethod method) {
  return project_dual_detailed(alpha_hat, caps, rho, method).alpha;
}

Eigen::VectorXd project_dual(const Eigen::Ref<const Eigen::VectorXd>& alpha_hat, double cap,
                             double rho, ProjectionMethod method) {
  const Eigen::VectorXd caps = Eigen::VectorXd::Constant(alpha_hat.size(), cap);
  return project_dual(alpha_hat, caps, rho, method);
}

Eigen::VectorXd knapsack_maximizer(const Eigen::Ref<const Eigen::VectorXd>& weights,
                                   const Eigen::Ref<const Eigen::VectorXd>& caps, double rho) {
  if (weights.size() != caps.size()) {
    throw ArgumentError("knapsack_maximizer: weights and caps have different lengths");
  }
  std::vector<Eigen::Index> order;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights(i) > 0.0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return weights(a) > weights(b); });
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(weights.size());
  double budget = rho;
  for (Eigen::Index i : order) {
    if (budget <= 0.0) break;
    alpha(i) = std::min(caps(i), budget);
    budget -= alpha(i);
  }
  return alpha;
}

bool in_polytope(const Eigen::Ref<const Eigen::VectorXd>& alpha,
                 const Eigen::Ref<const Eigen::VectorXd>& caps, double rho, double slack) {
  if (alpha.size() != caps.size()) return false;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (!(alpha(i) >= -slack && alpha(i) <= caps(i) + slack)) return false;
  }
  return alpha.sum() <= rho + slack;
}

}  // namespace nmkl
