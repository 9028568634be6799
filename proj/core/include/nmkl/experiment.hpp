#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nmkl/dataset.hpp"
#include "nmkl/trainers.hpp"

namespace nmkl {

// Noise-sweep protocol: for every dataset, trial, noise level and variant
//   scale to [0, 1] -> split 80/20 -> flip the training labels with prob. q
//   (test labels stay clean) -> carve 10% of the training part for validation
//   -> model_select -> test accuracy.
// The split depends on (seed, dataset, trial) only and the flip mask on
// (seed, dataset, trial, q), so all variants see identical data in a cell.
struct ExperimentConfig {
  std::vector<Variant> variants = {Variant::kStPMKL, Variant::kSiPMKL, Variant::kMiPMKL};
  std::vector<double> q_grid = {0.0, 0.1, 0.2, 0.3, 0.4};
  int trials = 5;
  std::uint64_t seed = 1;
  double train_frac = 0.8;
  double validation_frac = 0.1;
  TrainConfig train;  // grids, solver limits, chance level; variant and q are set per cell
  KernelMode kernel_mode = KernelMode::kSigma;
  GramPrecision precision = GramPrecision::kDouble;
  unsigned jobs = 1;

  void validate() const;
};

struct SweepRow {
  std::string dataset;
  Variant variant = Variant::kStPMKL;
  double q = 0.0;
  int trial = 0;
  double accuracy = 0.0;
  double lambda = 0.0;
  double rho = 0.0;
  double rho_fraction = 0.0;
  int iterations = 0;
  double final_gap = 0.0;
  double seconds = 0.0;       // model selection wall time
  double gram_seconds = 0.0;  // Gram precomputation for the trial
  std::string error;          // empty on success
};

struct SweepResult {
  std::vector<SweepRow> rows;  // canonical order: dataset, variant, q, trial

  bool all_succeeded() const;
};

// Dataset names key the seeds and the row order, so they must be distinct.
SweepResult run_sweep(const std::vector<Dataset>& datasets, const ExperimentConfig& config);

struct AggregateRow {
  std::string dataset;
  Variant variant = Variant::kStPMKL;
  double q = 0.0;
  int completed = 0;
  int failed = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // sample standard deviation, 0 for fewer than two trials
};

std::vector<AggregateRow> aggregate(const SweepResult& result);

// results.csv: dataset,variant,q,trial,accuracy,lambda,rho,rho_fraction,iterations,final_gap,error
void write_results_csv(const SweepResult& result, std::ostream& out);
// timings.csv: dataset,variant,q,trial,seconds,gram_seconds (not reproducible by nature)
void write_timings_csv(const SweepResult& result, std::ostream& out);
// aggregate.csv: dataset,variant,q,completed,failed,mean_accuracy,std_accuracy
void write_aggregate_csv(const std::vector<AggregateRow>& rows, std::ostream& out);

struct ConvergenceConfig {
  double lambda = 0.01;
  double rho = 100.0;
  int iterations = 1000;
  int checkpoint_every = 10;
  std::vector<double> gamma0_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
  int fit_from = 100;
  int fit_to = 1000;
  KernelMode kernel_mode = KernelMode::kSigma;
  GramPrecision precision = GramPrecision::kDouble;
};

struct ViRun {
  double gamma0 = 0.0;
  double final_gap = 0.0;  // +inf when the run diverged
  double slope = 0.0;
  std::string error;
  SolveTrace trace;
};

struct ConvergenceReport {
  SolveTrace amp;
  double amp_slope = 0.0;
  std::vector<ViRun> vi_runs;
  std::size_t best_vi = 0;  // index into vi_runs with the smallest final gap

  const ViRun& vi() const { return vi_runs.at(best_vi); }
};

// AMP against VI on one dataset (all rows, already scaled) with fixed lambda
// and rho; every iteration runs (no early stop).
ConvergenceReport bench_convergence(const Dataset& data, const ConvergenceConfig& config);

// Least-squares slope of log(gap) against log(iteration) over checkpoints with
// from <= iteration <= to and gap > 0. NaN with fewer than two usable points.
double loglog_slope(const SolveTrace& trace, int from, int to);

// iter,gap
void write_gap_trace_csv(const SolveTrace& trace, std::ostream& out);

// Shortest round-trip decimal form of a double.
std::string format_double(double value);

// Writes "key = value" lines in key order.
void write_manifest(const std::map<std::string, std::string>& entries,
                    const std::filesystem::path& path);

}  // namespace nmkl
