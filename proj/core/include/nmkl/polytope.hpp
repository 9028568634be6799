#pragma once

#include <Eigen/Dense>

namespace nmkl {

// Operations over the box-and-budget polytope
//   Q = { a : 0 <= a_i <= cap_i, sum_i a_i <= rho }.

enum class ProjectionMethod {
  kBisection,  // bisection on the shift eta (default)
  kSorted,     // exact O(n log n) breakpoint walk
};

struct DualProjection {
  Eigen::VectorXd alpha;
  double eta = 0.0;  // shift applied before clipping; 0 when the budget is slack
};

// Euclidean projection onto Q. The solution has the form
//   a_i = clip(a_hat_i - eta, 0, cap_i)
// with eta = 0 if clipping alone meets the budget, otherwise eta > 0 solves
//   sum_i clip(a_hat_i - eta, 0, cap_i) = rho.
// Bisection runs to an absolute tolerance of 1e-12 on eta (at most 200 halvings)
// and returns the upper end of the bracket, so the budget is never exceeded.
DualProjection project_dual_detailed(const Eigen::Ref<const Eigen::VectorXd>& alpha_hat,
                                     const Eigen::Ref<const Eigen::VectorXd>& caps, double rho,
                                     ProjectionMethod method = ProjectionMethod::kBisection);

Eigen::VectorXd project_dual(const Eigen::Ref<const Eigen::VectorXd>& alpha_hat,
                             const Eigen::Ref<const Eigen::VectorXd>& caps, double rho,
                             ProjectionMethod method = ProjectionMethod::kBisection);

Eigen::VectorXd project_dual(const Eigen::Ref<const Eigen::VectorXd>& alpha_hat, double cap,
                             double rho,
                             ProjectionMethod method = ProjectionMethod::kBisection);

// argmax of w^T a over Q (fractional knapsack): coordinates with positive weight
// are filled to their cap in decreasing weight order until the budget binds;
// the boundary coordinate takes the remainder. Ties go to the lower index.
Eigen::VectorXd knapsack_maximizer(const Eigen::Ref<const Eigen::VectorXd>& weights,
                                   const Eigen::Ref<const Eigen::VectorXd>& caps, double rho);

bool in_polytope(const Eigen::Ref<const Eigen::VectorXd>& alpha,
                 const Eigen::Ref<const Eigen::VectorXd>& caps, double rho,
                 double slack = 1e-9);

}  // namespace nmkl
