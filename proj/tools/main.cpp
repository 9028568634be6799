#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nmkl/dataset.hpp"
#include "nmkl/error.hpp"
#include "nmkl/experiment.hpp"
#include "nmkl/model_io.hpp"
#include "nmkl/trainers.hpp"

namespace fs = std::filesystem;
using namespace nmkl;

namespace {

constexpr int kExitCellFailures = 1;
constexpr int kExitError = 2;

std::string default_out_dir() {
  const char* env = std::getenv("NMKL_OUT_DIR");
  return env && *env ? env : "nmkl_out";
}

std::string join(const std::vector<double>& values) {
  std::string s;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) s += ',';
    s += format_double(values[k]);
  }
  return s;
}

std::string join(const std::vector<std::string>& values) {
  std::string s;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) s += ',';
    s += values[k];
  }
  return s;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

Dataset load_named(const std::string& path, const std::string& format) {
  Dataset d = load_dataset(path, parse_file_format(format));
  validate(d);
  return d;
}

// Every flag lives on the root command so a flat key = value config file can
// set any of them; each subcommand reads the ones it needs.
struct Flags {
  std::vector<std::string> data;
  std::string format = "csv";
  std::vector<std::string> variants;
  std::vector<double> q_grid = {0.0, 0.1, 0.2, 0.3, 0.4};
  int trials = 5;
  std::uint64_t seed = 1;
  std::vector<double> lambda_grid = TrainConfig{}.lambda_grid;
  std::vector<double> rho_grid = TrainConfig{}.rho_fraction_grid;
  int t_max = 1000;
  double gap_tol = 1e-2;
  double epsilon = 0.1;
  std::string dual_mode = "absorbed";
  unsigned jobs = 1;
  std::string kernel_mode = "sigma";
  std::string precision = "double";
  std::string out;
  bool timings = false;
  double lambda = 0.01;
  double rho = 100.0;
  int checkpoint = 10;
  std::vector<double> gamma0_grid = ConvergenceConfig{}.gamma0_grid;
  double q = 0.0;
  double validation_frac = 0.1;
  std::string model;
  Eigen::Index n = 400;
  Eigen::Index d = 4;
  Eigen::Index informative = 2;
  double separation = 2.0;

  TrainConfig train_config() const {
    TrainConfig c;
    c.lambda_grid = lambda_grid;
    c.rho_fraction_grid = rho_grid;
    c.max_iters = t_max;
    c.gap_tol = gap_tol;
    c.epsilon_chance = epsilon;
    c.dual_mode = dual_mode == "faithful" ? DualMode::kFaithful : DualMode::kAbsorbed;
    c.jobs = jobs;
    return c;
  }

  GramPrecision gram_precision() const {
    return precision == "float" ? GramPrecision::kFloat : GramPrecision::kDouble;
  }

  fs::path out_dir() const { return out.empty() ? fs::path(default_out_dir()) : fs::path(out); }

  const std::string& single_data(const char* command) const {
    if (data.size() != 1) {
      throw ArgumentError(std::string(command) + ": --data takes exactly one file");
    }
    return data.front();
  }

  std::map<std::string, std::string> manifest(const std::string& command) const {
    return {{"command", command},           {"data", join(data)},
            {"format", format},             {"seed", std::to_string(seed)},
            {"kernel_mode", kernel_mode},   {"precision", precision}};
  }

  void record_training(std::map<std::string, std::string>& m) const {
    m["lambda_grid"] = join(lambda_grid);
    m["rho_grid"] = join(rho_grid);
    m["t_max"] = std::to_string(t_max);
    m["gap_tol"] = format_double(gap_tol);
    m["epsilon"] = format_double(epsilon);
    m["dual_mode"] = dual_mode;
  }
};

int run_sweep_cmd(const Flags& f) {
  if (f.data.empty()) throw ArgumentError("sweep: --data is required");
  const std::vector<std::string> variants =
      f.variants.empty() ? std::vector<std::string>{"StPMKL", "SiPMKL", "MiPMKL"} : f.variants;
  ExperimentConfig cfg;
  cfg.variants.clear();
  for (const auto& v : variants) cfg.variants.push_back(parse_variant(v));
  cfg.q_grid = f.q_grid;
  cfg.trials = f.trials;
  cfg.seed = f.seed;
  cfg.train = f.train_config();
  cfg.kernel_mode = parse_kernel_mode(f.kernel_mode);
  cfg.precision = f.gram_precision();
  cfg.jobs = f.jobs;
  cfg.validate();

  std::vector<Dataset> datasets;
  for (const auto& path : f.data) datasets.push_back(load_named(path, f.format));

  const fs::path out = f.out_dir();
  fs::create_directories(out);
  const SweepResult result = run_sweep(datasets, cfg);
  {
    auto o = open_out(out / "results.csv");
    write_results_csv(result, o);
  }
  {
    auto o = open_out(out / "aggregate.csv");
    write_aggregate_csv(aggregate(result), o);
  }
  if (f.timings) {
    auto o = open_out(out / "timings.csv");
    write_timings_csv(result, o);
  }
  auto manifest = f.manifest("sweep");
  f.record_training(manifest);
  manifest["variants"] = join(variants);
  manifest["q_grid"] = join(f.q_grid);
  manifest["trials"] = std::to_string(f.trials);
  write_manifest(manifest, out / "manifest.txt");

  std::size_t failed = 0;
  for (const auto& row : result.rows) failed += !row.error.empty();
  std::cout << "wrote " << result.rows.size() << " rows to " << (out / "results.csv").string()
            << '\n';
  if (failed) {
    std::cerr << failed << " cell(s) failed; see the error column\n";
    return kExitCellFailures;
  }
  return 0;
}

int run_bench_cmd(const Flags& f) {
  const Dataset data = minmax_scale(load_named(f.single_data("bench-convergence"), f.format));
  ConvergenceConfig cfg;
  cfg.lambda = f.lambda;
  cfg.rho = f.rho;
  cfg.iterations = f.t_max;
  cfg.checkpoint_every = f.checkpoint;
  cfg.gamma0_grid = f.gamma0_grid;
  cfg.fit_to = f.t_max;
  cfg.kernel_mode = parse_kernel_mode(f.kernel_mode);
  cfg.precision = f.gram_precision();
  const ConvergenceReport r = bench_convergence(data, cfg);

  const fs::path out = f.out_dir();
  fs::create_directories(out);
  {
    auto o = open_out(out / "amp_gap.csv");
    write_gap_trace_csv(r.amp, o);
  }
  {
    auto o = open_out(out / "vi_gap.csv");
    write_gap_trace_csv(r.vi().trace, o);
  }
  {
    auto o = open_out(out / "convergence_summary.csv");
    o << "method,gamma0,final_gap,slope,error\n";
    o << "AMP,," << format_double(r.amp.points.back().gap) << ',' << format_double(r.amp_slope)
      << ",\n";
    for (const auto& run : r.vi_runs) {
      o << "VI," << format_double(run.gamma0) << ',' << format_double(run.final_gap) << ','
        << format_double(run.slope) << ',' << run.error << '\n';
    }
  }
  auto manifest = f.manifest("bench-convergence");
  manifest["lambda"] = format_double(f.lambda);
  manifest["rho"] = format_double(f.rho);
  manifest["t_max"] = std::to_string(f.t_max);
  manifest["checkpoint"] = std::to_string(f.checkpoint);
  manifest["gamma0_grid"] = join(f.gamma0_grid);
  manifest["best_gamma0"] = format_double(r.vi().gamma0);
  write_manifest(manifest, out / "manifest.txt");
  std::cout << "AMP final gap " << r.amp.points.back().gap << " (slope " << r.amp_slope
            << "); best VI gamma0 " << r.vi().gamma0 << " final gap " << r.vi().final_gap
            << " (slope " << r.vi().slope << ")\n";
  return 0;
}

int run_train_cmd(const Flags& f) {
  const Dataset raw = load_named(f.single_data("train"), f.format);
  const MinMaxScaler scaler = MinMaxScaler::fit(raw.features);
  Dataset data = raw;
  data.features = scaler.apply(raw.features);

  if (f.variants.size() > 1) throw ArgumentError("train: --variant takes a single value");
  TrainConfig cfg = f.train_config();
  cfg.variant = parse_variant(f.variants.empty() ? "StPMKL" : f.variants.front());
  cfg.q = f.q;
  cfg.seed = f.seed;
  cfg.validate();
  const auto mode = parse_kernel_mode(f.kernel_mode);
  const auto grid = search_grid(cfg);

  Model model;
  if (grid.size() == 1 || f.validation_frac <= 0.0) {
    const KernelBank bank(build_bank(data.dim(), mode), data.features, f.gram_precision(),
                          f.jobs);
    model = train(data, bank, cfg, grid.front()).model;
  } else {
    // The held-out part plays the role of the "test" block of split().
    const SplitResult parts = split(data, 1.0 - f.validation_frac, 0.0, f.seed);
    const Dataset fit_rows = subset(data, parts.train);
    const KernelBank bank(build_bank(data.dim(), mode), fit_rows.features, f.gram_precision(),
                          f.jobs);
    model = model_select(fit_rows, bank, subset(data, parts.test), cfg).result.model;
  }
  model.scaler = scaler;

  const fs::path path =
      f.model.empty() ? fs::path(default_out_dir()) / "model.json" : fs::path(f.model);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_model(model, path);
  const double acc = accuracy(raw.labels, predict(model, raw.features).labels);
  std::cout << "saved " << path.string() << " (lambda " << format_double(model.lambda) << ", rho "
            << format_double(model.rho) << ", training accuracy " << format_double(acc) << ")\n";
  return 0;
}

int run_predict_cmd(const Flags& f) {
  if (f.model.empty()) throw ArgumentError("predict: --model is required");
  const Model model = load_model(fs::path(f.model));
  const Dataset query = load_dataset(f.single_data("predict"), parse_file_format(f.format),
                                     f.format == "svmlight"
                                         ? std::optional<Eigen::Index>(model.train_features.cols())
                                         : std::nullopt);
  const Prediction p = predict(model, query.features);
  const fs::path path =
      f.out.empty() ? fs::path(default_out_dir()) / "predictions.csv" : fs::path(f.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto o = open_out(path);
  o << "score,label\n";
  for (Eigen::Index i = 0; i < p.scores.size(); ++i) {
    o << format_double(p.scores(i)) << ',' << (p.labels(i) > 0 ? "1" : "-1") << '\n';
  }
  std::cout << "accuracy " << format_double(accuracy(query.labels, p.labels)) << '\n';
  return 0;
}

int run_synth_cmd(const Flags& f) {
  if (f.out.empty()) throw ArgumentError("synth: --out is required");
  const Dataset d = make_two_gaussians(f.n, f.d, f.separation, f.informative, f.seed);
  const fs::path path(f.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_csv(d, path);
  return 0;
}

void add_options(CLI::App& app, Flags& f) {
  app.add_option("--data", f.data, "Dataset file(s); only sweep takes several")->delimiter(',');
  app.add_option("--format", f.format, "csv or svmlight")
      ->check(CLI::IsMember({"csv", "svmlight"}))
      ->capture_default_str();
  app.add_option("--variant", f.variants, "StPMKL, SiPMKL, MiPMKL (sweep default: all three)")
      ->delimiter(',')
      ->check(CLI::IsMember({"StPMKL", "SiPMKL", "MiPMKL"}));
  app.add_option("--q-grid", f.q_grid, "sweep: label-noise levels")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--trials", f.trials, "sweep: random splits per cell")->capture_default_str();
  app.add_option("--seed", f.seed, "Base seed")->capture_default_str();
  app.add_option("--lambda-grid", f.lambda_grid, "Regularization values to search")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--rho-grid", f.rho_grid, "Budget fractions rho/n to search (StPMKL)")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--t-max", f.t_max, "Solver iteration cap")->capture_default_str();
  app.add_option("--gap-tol", f.gap_tol, "Stop once the duality gap is at most this")
      ->capture_default_str();
  app.add_option("--epsilon", f.epsilon, "Chance-constraint level (sets tau)")
      ->capture_default_str();
  app.add_option("--dual-mode", f.dual_mode, "StPMKL dual polytope: absorbed or faithful")
      ->check(CLI::IsMember({"absorbed", "faithful"}))
      ->capture_default_str();
  app.add_option("--jobs", f.jobs, "Parallel workers (0 = all cores)")->capture_default_str();
  app.add_option("--kernel-mode", f.kernel_mode, "Gaussian width convention: sigma or inverse")
      ->check(CLI::IsMember({"sigma", "inverse"}))
      ->capture_default_str();
  app.add_option("--precision", f.precision, "Gram storage: double or float")
      ->check(CLI::IsMember({"double", "float"}))
      ->capture_default_str();
  app.add_option("--out", f.out,
                 "Output directory for sweep and bench-convergence (default $NMKL_OUT_DIR or "
                 "nmkl_out); output file for predict and synth");
  app.add_flag("--timings", f.timings, "sweep: also write timings.csv (not reproducible)");
  app.add_option("--lambda", f.lambda, "bench-convergence: lambda")->capture_default_str();
  app.add_option("--rho", f.rho, "bench-convergence: budget rho")->capture_default_str();
  app.add_option("--checkpoint", f.checkpoint, "bench-convergence: gap checkpoint interval")
      ->capture_default_str();
  app.add_option("--gamma0-grid", f.gamma0_grid, "bench-convergence: VI step scales")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--q", f.q, "train: assumed label-noise level")->capture_default_str();
  app.add_option("--validation-frac", f.validation_frac, "train: held-out fraction for tuning")
      ->capture_default_str();
  app.add_option("--model", f.model, "train: output path; predict: model to load");
  app.add_option("--n", f.n, "synth: rows")->capture_default_str();
  app.add_option("--d", f.d, "synth: features")->capture_default_str();
  app.add_option("--informative", f.informative, "synth: informative features")
      ->capture_default_str();
  app.add_option("--separation", f.separation, "synth: distance between class means")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise-robust multiple kernel learning"};
  app.set_config("--config", "", "Flat key = value file with long flag names; flags override it");
  app.require_subcommand(1);

  Flags flags;
  add_options(app, flags);
  auto* sweep = app.add_subcommand("sweep", "Accuracy versus label-noise level");
  auto* bench = app.add_subcommand("bench-convergence", "AMP versus VI duality-gap decay");
  auto* train_cmd = app.add_subcommand("train", "Fit one model and save it");
  auto* predict_cmd = app.add_subcommand("predict", "Score a labelled file with a saved model");
  auto* synth = app.add_subcommand("synth", "Write a two-Gaussian dataset as CSV");
  for (auto* cmd : {sweep, bench, train_cmd, predict_cmd, synth}) cmd->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) return run_sweep_cmd(flags);
    if (*bench) return run_bench_cmd(flags);
    if (*train_cmd) return run_train_cmd(flags);
    if (*predict_cmd) return run_predict_cmd(flags);
    if (*synth) return run_synth_cmd(flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return 0;
}
