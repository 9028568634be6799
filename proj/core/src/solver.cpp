#include "nmkl/solver.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "nmkl/composite_map.hpp"
#include "nmkl/error.hpp"

namespace nmkl {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void require_finite(bool ok, int iteration, const char* what) {
  if (!ok) {
    throw SolverError(std::string("non-finite ") + what + " at iteration " +
                      std::to_string(iteration) + " (check the step size and the data)");
  }
}

void check_options(int max_iters, int checkpoint_every) {
  if (max_iters < 1) throw ArgumentError("solver: max_iters must be >= 1");
  if (checkpoint_every < 1) throw ArgumentError("solver: checkpoint_every must be >= 1");
}

// Running sums of the iterates; averages are formed on demand.
struct Averager {
  Eigen::MatrixXd coef;
  Eigen::MatrixXd kcoef;
  Eigen::VectorXd alpha;
  Eigen::MatrixXd k_alpha_y;  // sum of K_j (alpha_t o y)
  int count = 0;

  Averager(Eigen::Index n, Eigen::Index m)
      : coef(Eigen::MatrixXd::Zero(n, m)),
        kcoef(Eigen::MatrixXd::Zero(n, m)),
        alpha(Eigen::VectorXd::Zero(n)),
        k_alpha_y(Eigen::MatrixXd::Zero(n, m)) {}

  PrimalState primal() const {
    const double inv = 1.0 / count;
    return {coef * inv, kcoef * inv};
  }
  DualState dual() const { return alpha / static_cast<double>(count); }
  Eigen::MatrixXd products() const { return k_alpha_y / static_cast<double>(count); }
};

}  // namespace

std::string to_string(SolveStatus status) {
  return status == SolveStatus::kGapConverged ? "gap_converged" : "iteration_cap";
}

void write_trace_csv(const SolveTrace& trace, std::ostream& out, bool include_time) {
  out << (include_time ? "iter,objective,gap,seconds\n" : "iter,objective,gap\n");
  const auto old_precision = out.precision(17);
  for (const auto& p : trace.points) {
    out << p.iteration << ',' << p.objective << ',' << p.gap;
    if (include_time) out << ',' << p.seconds;
    out << '\n';
  }
  out.precision(old_precision);
}

double default_step(const SaddleProblem& prob) {
  return std::sqrt(static_cast<double>(prob.n()) / (2.0 * static_cast<double>(prob.m())));
}

SolveResult amp_solve(const SaddleProblem& prob, const AmpOptions& options) {
  check_options(options.max_iters, options.checkpoint_every);
  const Eigen::Index n = prob.n();
  const Eigen::Index m = prob.m();
  const double step = options.step.value_or(default_step(prob));
  if (!(step > 0.0)) throw ArgumentError("amp_solve: step must be positive");
  const double step_over_n = step / static_cast<double>(n);
  const KernelBank& bank = prob.bank();
  const auto start = Clock::now();

  PrimalState f = PrimalState::zero(n, m);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd ay(n);
  Eigen::MatrixXd k_ay(n, m);
  Averager avg(n, m);
  SolveResult result;

  for (int t = 1; t <= options.max_iters; ++t) {
    const Eigen::VectorXd r_prev = residuals(f, prob);
    require_finite(r_prev.allFinite(), t, "residual");
    const Eigen::VectorXd alpha_hat = beta + step_over_n * r_prev;
    require_finite(alpha_hat.allFinite(), t, "dual step");
    const Eigen::VectorXd alpha =
        project_dual(alpha_hat, prob.caps(), prob.rho(), options.projection);

    // Gradient step: every block moves by (step / n) (alpha o y).
    ay = alpha.cwiseProduct(prob.y());
    for (Eigen::Index j = 0; j < m; ++j) bank.apply(j, ay, k_ay.col(j));
    f.coef.colwise() += step_over_n * ay;
    f.kcoef += step_over_n * k_ay;

    auto mapped = composite_map(f, step * prob.lambda());
    require_finite(std::isfinite(mapped.shrinkage.total), t, "block norm");
    f = std::move(mapped.state);

    const Eigen::VectorXd r_new = residuals(f, prob);
    require_finite(r_new.allFinite(), t, "residual");
    const Eigen::VectorXd beta_hat = beta + step_over_n * r_new;
    require_finite(beta_hat.allFinite(), t, "dual step");
    beta = project_dual(beta_hat, prob.caps(), prob.rho(), options.projection);

    avg.coef += f.coef;
    avg.kcoef += f.kcoef;
    avg.alpha += alpha;
    avg.k_alpha_y += k_ay;
    avg.count = t;

    if (t % options.checkpoint_every == 0 || t == options.max_iters) {
      const PrimalState f_bar = avg.primal();
      const DualState a_bar = avg.dual();
      const GapReport g = duality_gap(f_bar, a_bar, avg.products(), prob);
      require_finite(std::isfinite(g.gap), t, "duality gap");
      result.trace.points.push_back({t, objective(f_bar, a_bar, prob), g.gap, seconds_since(start)});
      result.trace.iterations = t;
      result.gap = g;
      if (g.gap <= options.gap_tol) {
        result.trace.status = SolveStatus::kGapConverged;
        break;
      }
    }
  }
  result.primal = avg.primal();
  result.dual = avg.dual();
  return result;
}

SolveResult vi_solve(const SaddleProblem& prob, const ViOptions& options) {
  check_options(options.max_iters, options.checkpoint_every);
  if (!(options.gamma0 > 0.0)) throw ArgumentError("vi_solve: gamma0 must be positive");
  const Eigen::Index n = prob.n();
  const Eigen::Index m = prob.m();
  const double step = options.gamma0 / std::sqrt(static_cast<double>(options.max_iters));
  const double step_over_n = step / static_cast<double>(n);
  const KernelBank& bank = prob.bank();
  const auto start = Clock::now();

  PrimalState f = PrimalState::zero(n, m);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd ay(n);
  Eigen::VectorXd k_ay(n);
  Eigen::VectorXd norms(m);
  Averager avg(n, m);
  SolveResult result;

  for (int t = 1; t <= options.max_iters; ++t) {
    const Eigen::VectorXd r = residuals(f, prob);
    require_finite(r.allFinite(), t, "residual");
    for (Eigen::Index j = 0; j < m; ++j) norms(j) = std::sqrt(f.norm_sq(j));
    const double sum_norms = norms.sum();
    require_finite(std::isfinite(sum_norms), t, "block norm");

    // dR/df_j = lambda (sum_k |f_k|) f_j / |f_j|; dL/df_j = -(1/n) sum_i alpha_i y_i k_j(x_i, .)
    ay = alpha.cwiseProduct(prob.y());
    for (Eigen::Index j = 0; j < m; ++j) {
      const double shrink =
          norms(j) > 0.0 ? 1.0 - step * prob.lambda() * sum_norms / norms(j) : 1.0;
      bank.apply(j, ay, k_ay);
      f.coef.col(j) = shrink * f.coef.col(j) + step_over_n * ay;
      f.kcoef.col(j) = shrink * f.kcoef.col(j) + step_over_n * k_ay;
    }
    const Eigen::VectorXd alpha_hat = alpha + step_over_n * r;
    require_finite(alpha_hat.allFinite(), t, "dual step");
    alpha = project_dual(alpha_hat, prob.caps(), prob.rho(), options.projection);

    avg.coef += f.coef;
    avg.kcoef += f.kcoef;
    avg.alpha += alpha;
    avg.count = t;

    if (t % options.checkpoint_every == 0 || t == options.max_iters) {
      const PrimalState f_bar = avg.primal();
      const DualState a_bar = avg.dual();
      const GapReport g = duality_gap(f_bar, a_bar, prob);
      require_finite(std::isfinite(g.gap), t, "duality gap");
      result.trace.points.push_back({t, objective(f_bar, a_bar, prob), g.gap, seconds_since(start)});
      result.trace.iterations = t;
      result.gap = g;
      if (g.gap <= options.gap_tol) {
        result.trace.status = SolveStatus::kGapConverged;
        break;
      }
    }
  }
  result.primal = avg.primal();
  result.dual = avg.dual();
  return result;
}

}  // namespace nmkl
