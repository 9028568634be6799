#include "nmkl/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "nmkl/error.hpp"

namespace nmkl {

Variant parse_variant(const std::string& name) {
  if (name == "StPMKL" || name == "stpmkl") return Variant::kStPMKL;
  if (name == "SiPMKL" || name == "sipmkl") return Variant::kSiPMKL;
  if (name == "MiPMKL" || name == "mipmkl") return Variant::kMiPMKL;
  throw ArgumentError("unknown variant '" + name + "' (expected StPMKL, SiPMKL or MiPMKL)");
}

std::string to_string(Variant variant) {
  switch (variant) {
    case Variant::kSiPMKL:
      return "SiPMKL";
    case Variant::kMiPMKL:
      return "MiPMKL";
    case Variant::kStPMKL:
    default:
      return "StPMKL";
  }
}

double compute_tau(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw ArgumentError("chance level epsilon must lie in (0, 1]");
  }
  return std::sqrt(0.5 * std::log(1.0 / epsilon));
}

double compute_rho(Eigen::Index n, double q, double tau, std::optional<double> cap) {
  const double nn = static_cast<double>(n);
  const double rho = (1.0 - q + tau + tau / std::sqrt(nn)) * nn;
  return std::min(rho, nn * cap.value_or(1.0 + tau));
}

void TrainConfig::validate() const {
  if (lambda_grid.empty() || rho_fraction_grid.empty()) {
    throw ArgumentError("tuning grids must be nonempty");
  }
  for (double l : lambda_grid) {
    if (!(l > 0.0)) throw ArgumentError("lambda values must be positive");
  }
  for (double r : rho_fraction_grid) {
    if (!(r > 0.0)) throw ArgumentError("rho fractions must be positive");
  }
  if (max_iters < 1) throw ArgumentError("max_iters must be >= 1");
  if (!(gap_tol > 0.0)) throw ArgumentError("gap_tol must be positive");
  if (!(q >= 0.0 && q < 0.5)) throw ArgumentError("q must lie in [0, 0.5)");
  compute_tau(epsilon_chance);
}

SaddleProblem make_problem(const KernelBank& bank, const Eigen::VectorXd& y,
                           const TrainConfig& config, const Hyper& hyper) {
  const double n = static_cast<double>(y.size());
  switch (config.variant) {
    case Variant::kSiPMKL:
      return SaddleProblem(bank, y, hyper.lambda, 1.0, n);
    case Variant::kStPMKL:
      if (config.dual_mode == DualMode::kFaithful) {
        const double tau = compute_tau(config.epsilon_chance);
        return SaddleProblem(bank, y, hyper.lambda, 1.0 + tau,
                             compute_rho(y.size(), config.q, tau));
      }
      return SaddleProblem(bank, y, hyper.lambda, 1.0, hyper.rho_fraction * n);
    case Variant::kMiPMKL:
    default:
      throw ArgumentError("make_problem: MiPMKL has no single saddle problem");
  }
}

Eigen::VectorXd robust_weights(const Eigen::Ref<const Eigen::VectorXd>& losses, double budget) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(losses.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return losses(a) < losses(b); });
  Eigen::VectorXd p = Eigen::VectorXd::Zero(losses.size());
  double remaining = budget;
  for (Eigen::Index i : order) {
    if (losses(i) > 1.0 || remaining <= 0.0) break;
    p(i) = std::min(1.0, remaining);
    remaining -= p(i);
  }
  return p;
}

double robust_objective(const Eigen::Ref<const Eigen::VectorXd>& losses,
                        const Eigen::Ref<const Eigen::VectorXd>& weights, double regularizer) {
  const double n = static_cast<double>(losses.size());
  return (weights.dot(losses) + (1.0 - weights.array()).sum()) / n + regularizer;
}

namespace {

Model make_model(const Dataset& rows, const KernelBank& bank, const SolveResult& solve,
                 Variant variant, const Hyper& hyper, double rho) {
  Model model;
  model.variant = variant;
  model.specs = bank.specs();
  model.train_features = rows.features;
  model.coef = solve.primal.coef;
  model.lambda = hyper.lambda;
  model.rho = rho;
  model.rho_fraction = hyper.rho_fraction;
  model.iterations = solve.trace.iterations;
  model.final_gap = solve.gap.gap;
  model.status = solve.trace.status;
  return model;
}

AmpOptions amp_options(const TrainConfig& config) {
  AmpOptions opts;
  opts.max_iters = config.max_iters;
  opts.gap_tol = config.gap_tol;
  opts.checkpoint_every = config.checkpoint_every;
  return opts;
}

Eigen::VectorXd hinge(const Eigen::VectorXd& decision, const Eigen::VectorXd& y) {
  return (1.0 - y.array() * decision.array()).max(0.0).matrix();
}

TrainResult train_robust(const Dataset& rows, const KernelBank& bank, const TrainConfig& config,
                         const Hyper& hyper) {
  const Eigen::Index n = rows.size();
  const double nn = static_cast<double>(n);
  const double tau = compute_tau(config.epsilon_chance);
  const double budget = std::min(nn, (1.0 - config.q) * nn + tau * std::sqrt(nn));

  SolveResult current;
  current.primal = PrimalState::zero(n, bank.size());
  current.dual = Eigen::VectorXd::Zero(n);
  double rho_used = budget;
  double previous = robust_objective(Eigen::VectorXd::Ones(n), Eigen::VectorXd::Zero(n), 0.0);
  std::vector<double> history;

  for (int round = 0; round < config.robust_max_rounds; ++round) {
    const Eigen::VectorXd losses = hinge(current.primal.decision_values(), rows.labels);
    const double reg = regularizer(current.primal, hyper.lambda);
    const Eigen::VectorXd p = robust_weights(losses, budget);
    const double after_p = robust_objective(losses, p, reg);
    if (after_p > previous + 1e-12 * std::max(1.0, std::abs(previous))) {
      throw SolverError("MiPMKL: robust objective increased in the weight step (round " +
                        std::to_string(round) + ")");
    }
    if (p.sum() <= 0.0) break;

    // Weighted hinge MKL: caps p_i, no additional budget.
    SaddleProblem prob(bank, rows.labels, hyper.lambda, p, p.sum());
    SolveResult next = amp_solve(prob, amp_options(config));
    const Eigen::VectorXd next_losses = hinge(next.primal.decision_values(), rows.labels);
    const double after_f =
        robust_objective(next_losses, p, regularizer(next.primal, hyper.lambda));
    // The inner solve is approximate; an f-step that does not improve is rejected.
    if (after_f > after_p) break;
    current = std::move(next);
    rho_used = prob.rho();
    history.push_back(after_f);
    const bool converged = previous - after_f < config.robust_tol;
    previous = after_f;
    if (converged) break;
  }

  TrainResult result;
  result.model = make_model(rows, bank, current, Variant::kMiPMKL, hyper, rho_used);
  result.trace = current.trace;
  result.gap = current.gap;
  result.decision_values = current.primal.decision_values();
  result.robust_objective = std::move(history);
  return result;
}

// Column k holds the scores of query k; cross[j] is train x query for kernel j.
Eigen::VectorXd scores_from_cross(const std::vector<Eigen::MatrixXd>& cross,
                                  const Eigen::MatrixXd& coef, Eigen::Index n_query) {
  Eigen::VectorXd scores = Eigen::VectorXd::Zero(n_query);
  for (std::size_t j = 0; j < cross.size(); ++j) {
    const auto c = coef.col(static_cast<Eigen::Index>(j));
    if (c.isZero(0.0)) continue;
    scores.noalias() += cross[j].transpose() * c;
  }
  return scores;
}

Eigen::VectorXd sign_labels(const Eigen::VectorXd& scores) {
  return scores.unaryExpr([](double s) { return s >= 0.0 ? 1.0 : -1.0; });
}

}  // namespace

TrainResult train(const Dataset& train_rows, const KernelBank& bank, const TrainConfig& config,
                  const Hyper& hyper) {
  config.validate();
  if (bank.num_points() != train_rows.size()) {
    throw ArgumentError("train: kernel bank was built over " + std::to_string(bank.num_points()) +
                        " rows, dataset has " + std::to_string(train_rows.size()));
  }
  if (config.variant == Variant::kMiPMKL) return train_robust(train_rows, bank, config, hyper);

  const SaddleProblem prob = make_problem(bank, train_rows.labels, config, hyper);
  const SolveResult solve = amp_solve(prob, amp_options(config));
  TrainResult result;
  result.model = make_model(train_rows, bank, solve, config.variant, hyper, prob.rho());
  result.trace = solve.trace;
  result.gap = solve.gap;
  result.decision_values = solve.primal.decision_values();
  return result;
}

std::vector<Hyper> search_grid(const TrainConfig& config) {
  const bool tune_rho =
      config.variant == Variant::kStPMKL && config.dual_mode == DualMode::kAbsorbed;
  std::vector<Hyper> grid;
  for (double l : config.lambda_grid) {
    if (tune_rho) {
      for (double r : config.rho_fraction_grid) grid.push_back({l, r});
    } else {
      grid.push_back({l, 1.0});
    }
  }
  return grid;
}

Selection model_select(const Dataset& train_rows, const KernelBank& bank,
                       const Dataset& validation, const TrainConfig& config) {
  config.validate();
  if (validation.size() == 0) throw ArgumentError("model_select: empty validation set");
  if (validation.dim() != train_rows.dim()) {
    throw ArgumentError("model_select: validation and training feature counts differ");
  }
  std::vector<Eigen::MatrixXd> cross;
  cross.reserve(bank.specs().size());
  for (const auto& spec : bank.specs()) {
    cross.push_back(cross_gram(spec, train_rows.features, validation.features));
  }

  const std::vector<Hyper> grid = search_grid(config);
  std::vector<std::optional<TrainResult>> results(grid.size());
  std::vector<GridCell> cells(grid.size());
  auto run_cell = [&](std::size_t k) {
    TrainResult r = train(train_rows, bank, config, grid[k]);
    const Eigen::VectorXd scores = scores_from_cross(cross, r.model.coef, validation.size());
    cells[k] = {grid[k], accuracy(validation.labels, sign_labels(scores)), r.model.iterations,
                r.model.final_gap};
    results[k] = std::move(r);
  };

  unsigned jobs = config.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                   : config.jobs;
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, grid.size()));
  if (jobs <= 1) {
    for (std::size_t k = 0; k < grid.size(); ++k) run_cell(k);
  } else {
    std::vector<std::exception_ptr> errors(jobs);
    {
      std::vector<std::jthread> workers;
      for (unsigned w = 0; w < jobs; ++w) {
        workers.emplace_back([&, w] {
          try {
            for (std::size_t k = w; k < grid.size(); k += jobs) run_cell(k);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::size_t best = 0;
  for (std::size_t k = 1; k < cells.size(); ++k) {
    const auto& a = cells[k];
    const auto& b = cells[best];
    if (a.validation_accuracy != b.validation_accuracy) {
      if (a.validation_accuracy > b.validation_accuracy) best = k;
    } else if (a.hyper.lambda != b.hyper.lambda) {
      if (a.hyper.lambda > b.hyper.lambda) best = k;
    } else if (a.hyper.rho_fraction > b.hyper.rho_fraction) {
      best = k;
    }
  }
  Selection out;
  out.best = cells[best].hyper;
  out.validation_accuracy = cells[best].validation_accuracy;
  out.result = std::move(*results[best]);
  out.cells = std::move(cells);
  return out;
}

Prediction predict(const Model& model, const Eigen::MatrixXd& X_query) {
  if (X_query.cols() != model.train_features.cols()) {
    throw ArgumentError("predict: model expects " + std::to_string(model.train_features.cols()) +
                        " features, query has " + std::to_string(X_query.cols()));
  }
  const Eigen::MatrixXd X = model.scaler ? model.scaler->apply(X_query) : X_query;
  Prediction out;
  out.scores = Eigen::VectorXd::Zero(X.rows());
  for (std::size_t j = 0; j < model.specs.size(); ++j) {
    const auto c = model.coef.col(static_cast<Eigen::Index>(j));
    if (c.isZero(0.0)) continue;
    out.scores.noalias() += cross_gram(model.specs[j], model.train_features, X).transpose() * c;
  }
  out.labels = sign_labels(out.scores);
  return out;
}

double accuracy(const Eigen::VectorXd& truth, const Eigen::VectorXd& predicted) {
  if (truth.size() != predicted.size()) throw ArgumentError("accuracy: length mismatch");
  if (truth.size() == 0) return 0.0;
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) hits += truth(i) == predicted(i);
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace nmkl
