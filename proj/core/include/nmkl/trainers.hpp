#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nmkl/dataset.hpp"
#include "nmkl/kernel_bank.hpp"
#include "nmkl/solver.hpp"

namespace nmkl {

// StPMKL: worst case over the clean-example weights (the saddle problem with
//         a budgeted dual polytope).
// SiPMKL: plain l1-MKL with hinge loss (dual box [0, 1], no budget).
// MiPMKL: best case over the clean-example weights (robust hinge), solved by
//         alternating minimisation.
enum class Variant { kStPMKL, kSiPMKL, kMiPMKL };

Variant parse_variant(const std::string& name);
std::string to_string(Variant variant);

// kAbsorbed: dual caps are 1 and rho = rho_fraction * n comes from the tuning grid.
// kFaithful: caps are 1 + tau and rho = (1 - q + tau + tau / sqrt(n)) n.
enum class DualMode { kAbsorbed, kFaithful };

// tau = sqrt(ln(1 / epsilon) / 2) for a chance-constraint level epsilon in (0, 1].
double compute_tau(double epsilon);

// rho = (1 - q + tau + tau / sqrt(n)) n, clamped to n * cap. cap defaults to 1 + tau.
double compute_rho(Eigen::Index n, double q, double tau, std::optional<double> cap = std::nullopt);

struct TrainConfig {
  Variant variant = Variant::kStPMKL;
  double q = 0.0;                 // assumed noise level
  double epsilon_chance = 0.1;    // chance-constraint level, sets tau
  DualMode dual_mode = DualMode::kAbsorbed;
  std::vector<double> lambda_grid = {1e-3, 1e-2, 1e-1, 1.0, 10.0};
  std::vector<double> rho_fraction_grid = {1.0, 0.9, 0.8, 0.7, 0.6, 0.5};
  int max_iters = 1000;
  double gap_tol = 1e-2;
  int checkpoint_every = 10;
  std::uint64_t seed = 0;
  unsigned jobs = 1;              // parallel grid cells in model_select
  int robust_max_rounds = 20;     // MiPMKL outer rounds
  double robust_tol = 1e-4;       // MiPMKL stops when the objective drops by less

  void validate() const;
};

struct Hyper {
  double lambda = 1e-2;
  double rho_fraction = 1.0;
};

struct Model {
  Variant variant = Variant::kStPMKL;
  std::vector<KernelSpec> specs;
  Eigen::MatrixXd train_features;  // rows the expansions are built on
  Eigen::MatrixXd coef;            // n x m, column j holds the coefficients of f_j
  double lambda = 0.0;
  double rho = 0.0;
  double rho_fraction = 1.0;
  std::optional<MinMaxScaler> scaler;  // applied to raw query rows before prediction
  int iterations = 0;
  double final_gap = 0.0;
  SolveStatus status = SolveStatus::kIterationCap;
};

struct TrainResult {
  Model model;
  SolveTrace trace;   // trace of the (last accepted) saddle solve
  GapReport gap;
  Eigen::VectorXd decision_values;       // f(x_i) on the training rows from the solver cache
  std::vector<double> robust_objective;  // MiPMKL objective after each accepted round
};

// Builds the saddle problem for a single (variant, lambda, rho) cell and solves it.
SaddleProblem make_problem(const KernelBank& bank, const Eigen::VectorXd& y,
                           const TrainConfig& config, const Hyper& hyper);

TrainResult train(const Dataset& train_rows, const KernelBank& bank, const TrainConfig& config,
                  const Hyper& hyper);

// Exact minimiser of sum_i p_i (losses_i - 1) over p in [0,1]^n, sum p <= budget:
// examples are admitted in increasing loss order while losses_i <= 1, the last
// admitted one fractionally. Ties keep the lower index first.
Eigen::VectorXd robust_weights(const Eigen::Ref<const Eigen::VectorXd>& losses, double budget);

// (1/n) sum_i (p_i loss_i + 1 - p_i) + R(f)
double robust_objective(const Eigen::Ref<const Eigen::VectorXd>& losses,
                        const Eigen::Ref<const Eigen::VectorXd>& weights, double regularizer);

struct GridCell {
  Hyper hyper;
  double validation_accuracy = 0.0;
  int iterations = 0;
  double final_gap = 0.0;
};

struct Selection {
  Hyper best;
  double validation_accuracy = 0.0;
  TrainResult result;
  std::vector<GridCell> cells;
};

// The (lambda, rho_fraction) grid actually searched for a variant: the full
// product for StPMKL in absorbed mode, lambda only otherwise.
std::vector<Hyper> search_grid(const TrainConfig& config);

// Trains one model per grid cell and keeps the best validation accuracy.
// Ties prefer the larger lambda, then the larger rho fraction.
Selection model_select(const Dataset& train_rows, const KernelBank& bank,
                       const Dataset& validation, const TrainConfig& config);

struct Prediction {
  Eigen::VectorXd scores;
  Eigen::VectorXd labels;  // sign(score), with 0 mapped to +1
};

// score(x) = sum_j sum_i C(i, j) k_j(x_i, x)
Prediction predict(const Model& model, const Eigen::MatrixXd& X_query);

double accuracy(const Eigen::VectorXd& truth, const Eigen::VectorXd& predicted);

}  // namespace nmkl
