#include "nmkl/saddle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nmkl/error.hpp"

namespace nmkl {

SaddleProblem::SaddleProblem(const KernelBank& bank, Eigen::VectorXd y, double lambda,
                             double cap, double rho)
    : SaddleProblem(bank, y, lambda, Eigen::VectorXd::Constant(y.size(), cap), rho) {}

SaddleProblem::SaddleProblem(const KernelBank& bank, Eigen::VectorXd y, double lambda,
                             Eigen::VectorXd caps, double rho)
    : bank_(&bank), y_(std::move(y)), lambda_(lambda), caps_(std::move(caps)), rho_(rho) {
  validate();
}

void SaddleProblem::validate() {
  if (y_.size() != bank_->num_points()) {
    throw ArgumentError("SaddleProblem: " + std::to_string(y_.size()) + " labels for a bank over " +
                        std::to_string(bank_->num_points()) + " points");
  }
  if (bank_->size() < 1) throw ArgumentError("SaddleProblem: empty kernel bank");
  if (!(lambda_ > 0.0)) throw ArgumentError("SaddleProblem: lambda must be positive");
  if (caps_.size() != y_.size()) throw ArgumentError("SaddleProblem: caps length mismatch");
  if ((caps_.array() < 0.0).any()) throw ArgumentError("SaddleProblem: caps must be >= 0");
  if (!(rho_ > 0.0)) throw ArgumentError("SaddleProblem: rho must be positive");
  for (Eigen::Index i = 0; i < y_.size(); ++i) {
    if (y_(i) != 1.0 && y_(i) != -1.0) throw ArgumentError("SaddleProblem: labels must be +-1");
  }
  rho_ = std::min(rho_, caps_.sum());
  if (!(rho_ > 0.0)) throw ArgumentError("SaddleProblem: all dual caps are zero");
}

PrimalState PrimalState::zero(Eigen::Index n, Eigen::Index m) {
  return {Eigen::MatrixXd::Zero(n, m), Eigen::MatrixXd::Zero(n, m)};
}

PrimalState PrimalState::from_coefficients(Eigen::MatrixXd coef, const KernelBank& bank) {
  if (coef.rows() != bank.num_points() || coef.cols() != bank.size()) {
    throw ArgumentError("PrimalState: coefficient matrix must be n x m");
  }
  PrimalState s{std::move(coef), Eigen::MatrixXd(bank.num_points(), bank.size())};
  for (Eigen::Index j = 0; j < bank.size(); ++j) bank.apply(j, s.coef.col(j), s.kcoef.col(j));
  return s;
}

double PrimalState::norm_sq(Eigen::Index j) const {
  return std::max(0.0, coef.col(j).dot(kcoef.col(j)));
}

Eigen::VectorXd PrimalState::decision_values() const { return kcoef.rowwise().sum(); }

double PrimalState::cache_error(const KernelBank& bank) const {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < coef.cols(); ++j) {
    const Eigen::VectorXd fresh = bank.apply(j, coef.col(j));
    const double scale = std::max(fresh.norm(), 1e-300);
    worst = std::max(worst, (fresh - kcoef.col(j)).norm() / scale);
  }
  return worst;
}

namespace {

void check_dims(const PrimalState& f, const SaddleProblem& prob) {
  if (f.coef.rows() != prob.n() || f.coef.cols() != prob.m() || f.kcoef.rows() != prob.n() ||
      f.kcoef.cols() != prob.m()) {
    throw ArgumentError("primal state is not n x m for this problem");
  }
}

void check_dims(const DualState& alpha, const SaddleProblem& prob) {
  if (alpha.size() != prob.n()) throw ArgumentError("dual state length differs from n");
}

}  // namespace

Eigen::VectorXd residuals(const PrimalState& f, const SaddleProblem& prob) {
  check_dims(f, prob);
  return (1.0 - prob.y().array() * f.decision_values().array()).matrix();
}

double regularizer(const PrimalState& f, double lambda) {
  double sum_norms = 0.0;
  for (Eigen::Index j = 0; j < f.coef.cols(); ++j) sum_norms += std::sqrt(f.norm_sq(j));
  return 0.5 * lambda * sum_norms * sum_norms;
}

double objective(const PrimalState& f, const DualState& alpha, const SaddleProblem& prob) {
  check_dims(alpha, prob);
  const Eigen::VectorXd r = residuals(f, prob);
  return regularizer(f, prob.lambda()) + alpha.dot(r) / static_cast<double>(prob.n());
}

bool is_feasible(const DualState& alpha, const SaddleProblem& prob, double slack) {
  return in_polytope(alpha, prob.caps(), prob.rho(), slack);
}

GapReport duality_gap(const PrimalState& f, const DualState& alpha, const SaddleProblem& prob) {
  check_dims(alpha, prob);
  const Eigen::VectorXd ay = alpha.cwiseProduct(prob.y());
  Eigen::MatrixXd k_alpha_y(prob.n(), prob.m());
  for (Eigen::Index j = 0; j < prob.m(); ++j) prob.bank().apply(j, ay, k_alpha_y.col(j));
  return duality_gap(f, alpha, k_alpha_y, prob);
}

GapReport duality_gap(const PrimalState& f, const DualState& alpha,
                      const Eigen::MatrixXd& k_alpha_y, const SaddleProblem& prob) {
  check_dims(f, prob);
  check_dims(alpha, prob);
  if (!is_feasible(alpha, prob)) throw ArgumentError("duality_gap: dual state outside Q");
  const double n = static_cast<double>(prob.n());

  const Eigen::VectorXd r = residuals(f, prob);
  const Eigen::VectorXd worst = knapsack_maximizer(r, prob.caps(), prob.rho());
  GapReport report;
  report.primal = regularizer(f, prob.lambda()) + worst.dot(r) / n;

  const Eigen::VectorXd ay = alpha.cwiseProduct(prob.y());
  double best = 0.0;
  for (Eigen::Index j = 0; j < prob.m(); ++j) {
    best = std::max(best, ay.dot(k_alpha_y.col(j)) / (n * n));
  }
  report.dual = alpha.sum() / n - best / (2.0 * prob.lambda());
  report.gap = report.primal - report.dual;
  return report;
}

}  // namespace nmkl
