#pragma once

#include <Eigen/Dense>

#include "nmkl/kernel_bank.hpp"
#include "nmkl/polytope.hpp"

namespace nmkl {

// min over f = (f_1..f_m), max over alpha in Q of
//
//   F(f, alpha) = R(f) + L(f, alpha)
//   R(f)        = (lambda / 2) (sum_j |f_j|)^2
//   L(f, alpha) = (1/n) sum_i alpha_i (1 - y_i f(x_i)),   f = sum_j f_j
//
// with Q = { 0 <= alpha_i <= cap_i, sum_i alpha_i <= rho } and |f_j| the norm in
// the RKHS of kernel j. Each f_j is a kernel expansion over the n training
// points, f_j = sum_i C(i, j) k_j(x_i, .), so |f_j|^2 = C_j^T K_j C_j.
class SaddleProblem {
 public:
  // Uniform cap. rho is clamped to n * cap.
  SaddleProblem(const KernelBank& bank, Eigen::VectorXd y, double lambda, double cap,
                double rho);
  // Per-coordinate caps. rho is clamped to sum(caps).
  SaddleProblem(const KernelBank& bank, Eigen::VectorXd y, double lambda, Eigen::VectorXd caps,
                double rho);

  const KernelBank& bank() const { return *bank_; }
  const Eigen::VectorXd& y() const { return y_; }
  double lambda() const { return lambda_; }
  const Eigen::VectorXd& caps() const { return caps_; }
  double rho() const { return rho_; }
  Eigen::Index n() const { return y_.size(); }
  Eigen::Index m() const { return bank_->size(); }

 private:
  void validate();

  const KernelBank* bank_;
  Eigen::VectorXd y_;
  double lambda_;
  Eigen::VectorXd caps_;
  double rho_;
};

// Expansion coefficients for every f_j plus the cached products K_j C_j.
struct PrimalState {
  Eigen::MatrixXd coef;   // n x m; column j holds the coefficients of f_j
  Eigen::MatrixXd kcoef;  // n x m; column j holds K_j coef.col(j)

  static PrimalState zero(Eigen::Index n, Eigen::Index m);
  static PrimalState from_coefficients(Eigen::MatrixXd coef, const KernelBank& bank);

  // |f_j|^2 from the cache, clamped at zero.
  double norm_sq(Eigen::Index j) const;
  // f(x_i) = sum_j (K_j C_j)_i for every training point.
  Eigen::VectorXd decision_values() const;
  // Largest relative deviation between the cache and a fresh recomputation.
  double cache_error(const KernelBank& bank) const;
};

using DualState = Eigen::VectorXd;

// r_i = 1 - y_i f(x_i)
Eigen::VectorXd residuals(const PrimalState& f, const SaddleProblem& prob);

// (lambda / 2) (sum_j |f_j|)^2
double regularizer(const PrimalState& f, double lambda);

// F(f, alpha)
double objective(const PrimalState& f, const DualState& alpha, const SaddleProblem& prob);

bool is_feasible(const DualState& alpha, const SaddleProblem& prob, double slack = 1e-9);

struct GapReport {
  double primal = 0.0;  // max_{alpha in Q} F(f, alpha)
  double dual = 0.0;    // min_f F(f, alpha)
  double gap = 0.0;     // primal - dual
};

// Duality gap certificate.
//
// The inner max is linear in alpha, so it is a fractional knapsack with
// weights r_i / n. For the inner min, write g_j = (1/n) sum_i alpha_i y_i
// k_j(x_i, .). Then L = (1/n) sum alpha_i - sum_j <f_j, g_j>, and by
// Cauchy-Schwarz sum_j <f_j, g_j> <= (sum_j |f_j|) max_j |g_j| with equality
// when all mass sits on the best kernel, so
//   min_f F = (1/n) sum_i alpha_i - max_j |g_j|^2 / (2 lambda),
//   |g_j|^2 = (1/n^2) (alpha o y)^T K_j (alpha o y).
// Throws ArgumentError when alpha is outside Q.
GapReport duality_gap(const PrimalState& f, const DualState& alpha, const SaddleProblem& prob);

// Same, with K_j (alpha o y) supplied as column j of `k_alpha_y`.
GapReport duality_gap(const PrimalState& f, const DualState& alpha,
                      const Eigen::MatrixXd& k_alpha_y, const SaddleProblem& prob);

}  // namespace nmkl
