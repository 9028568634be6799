#include "nmkl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "nmkl/error.hpp"
#include "nmkl/random.hpp"

namespace nmkl {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string csv_safe(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ' ';
  }
  return s;
}

int variant_rank(const ExperimentConfig& config, Variant v) {
  const auto it = std::find(config.variants.begin(), config.variants.end(), v);
  return static_cast<int>(it - config.variants.begin());
}

template <typename Fn>
void run_pool(std::size_t count, unsigned jobs, Fn&& fn) {
  jobs = static_cast<unsigned>(std::min<std::size_t>(std::max(jobs, 1u), count));
  if (jobs <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) fn(k);
    });
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void ExperimentConfig::validate() const {
  if (variants.empty()) throw ArgumentError("no variants selected");
  if (q_grid.empty()) throw ArgumentError("empty q grid");
  for (double q : q_grid) {
    if (!(q >= 0.0 && q < 0.5)) throw ArgumentError("q grid values must lie in [0, 0.5)");
  }
  if (trials < 1) throw ArgumentError("trials must be >= 1");
  train.validate();
}

bool SweepResult::all_succeeded() const {
  return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.error.empty(); });
}

SweepResult run_sweep(const std::vector<Dataset>& datasets, const ExperimentConfig& config) {
  config.validate();
  for (std::size_t a = 0; a < datasets.size(); ++a) {
    for (std::size_t b = a + 1; b < datasets.size(); ++b) {
      if (datasets[a].name == datasets[b].name) {
        throw ArgumentError("duplicate dataset name '" + datasets[a].name + "'");
      }
    }
  }
  SweepResult result;
  std::mutex sink;
  auto emit = [&](SweepRow row) {
    std::lock_guard lock(sink);
    result.rows.push_back(std::move(row));
  };

  for (const Dataset& raw : datasets) {
    const Dataset data = minmax_scale(raw);
    const std::uint64_t key = fnv1a(data.name);
    for (int trial = 0; trial < config.trials; ++trial) {
      SweepRow base;
      base.dataset = data.name;
      base.trial = trial;

      SplitResult parts;
      Dataset pool;
      Dataset test;
      KernelBank bank;
      std::vector<Eigen::Index> train_pos;
      std::vector<Eigen::Index> val_pos;
      try {
        parts = split(data, config.train_frac, config.validation_frac,
                      derive_seed(config.seed, {key, static_cast<std::uint64_t>(trial), 0}));
        // Training pool = train + validation, kept in ascending row order.
        std::vector<Eigen::Index> pool_rows = parts.train;
        pool_rows.insert(pool_rows.end(), parts.validation.begin(), parts.validation.end());
        std::sort(pool_rows.begin(), pool_rows.end());
        for (std::size_t k = 0; k < pool_rows.size(); ++k) {
          const auto pos = static_cast<Eigen::Index>(k);
          if (std::binary_search(parts.validation.begin(), parts.validation.end(), pool_rows[k])) {
            val_pos.push_back(pos);
          } else {
            train_pos.push_back(pos);
          }
        }
        pool = subset(data, pool_rows);
        test = subset(data, parts.test);
        const auto gram_start = Clock::now();
        bank = KernelBank(build_bank(data.dim(), config.kernel_mode),
                          subset(pool, train_pos).features, config.precision, config.jobs);
        base.gram_seconds = seconds_since(gram_start);
      } catch (const std::exception& e) {
        for (Variant v : config.variants) {
          for (double q : config.q_grid) {
            SweepRow row = base;
            row.variant = v;
            row.q = q;
            row.error = csv_safe(e.what());
            emit(std::move(row));
          }
        }
        continue;
      }

      struct Cell {
        double q;
        Variant variant;
      };
      std::vector<Cell> cells;
      for (double q : config.q_grid) {
        for (Variant v : config.variants) cells.push_back({q, v});
      }

      run_pool(cells.size(), config.jobs, [&](std::size_t k) {
        const Cell cell = cells[k];
        SweepRow row = base;
        row.variant = cell.variant;
        row.q = cell.q;
        try {
          const std::uint64_t q_key = std::bit_cast<std::uint64_t>(cell.q);
          const FlipResult noisy = flip_labels(
              pool, {cell.q, derive_seed(config.seed, {key, static_cast<std::uint64_t>(trial), 1,
                                                        q_key})});
          const Dataset train_rows = subset(noisy.data, train_pos);
          const Dataset val_rows = subset(noisy.data, val_pos);

          TrainConfig tc = config.train;
          tc.variant = cell.variant;
          tc.q = cell.q;
          tc.jobs = 1;
          const auto start = Clock::now();
          const Selection sel = model_select(train_rows, bank, val_rows, tc);
          const Prediction pred = predict(sel.result.model, test.features);
          row.seconds = seconds_since(start);
          row.accuracy = accuracy(test.labels, pred.labels);
          row.lambda = sel.best.lambda;
          row.rho = sel.result.model.rho;
          row.rho_fraction = sel.best.rho_fraction;
          row.iterations = sel.result.model.iterations;
          row.final_gap = sel.result.model.final_gap;
        } catch (const std::exception& e) {
          row.error = csv_safe(e.what());
        }
        emit(std::move(row));
      });
    }
  }

  std::vector<std::string> names;
  for (const auto& d : datasets) names.push_back(d.name);
  auto dataset_rank = [&](const std::string& name) {
    return std::find(names.begin(), names.end(), name) - names.begin();
  };
  std::sort(result.rows.begin(), result.rows.end(), [&](const SweepRow& a, const SweepRow& b) {
    const auto ka = std::make_tuple(dataset_rank(a.dataset), variant_rank(config, a.variant), a.q, a.trial);
    const auto kb = std::make_tuple(dataset_rank(b.dataset), variant_rank(config, b.variant), b.q, b.trial);
    return ka < kb;
  });
  return result;
}

std::vector<AggregateRow> aggregate(const SweepResult& result) {
  std::vector<AggregateRow> out;
  for (const SweepRow& row : result.rows) {
    if (out.empty() || out.back().dataset != row.dataset || out.back().variant != row.variant ||
        out.back().q != row.q) {
      AggregateRow agg;
      agg.dataset = row.dataset;
      agg.variant = row.variant;
      agg.q = row.q;
      out.push_back(agg);
    }
    AggregateRow& agg = out.back();
    if (row.error.empty()) {
      ++agg.completed;
      agg.mean_accuracy += row.accuracy;  // sum for now
    } else {
      ++agg.failed;
    }
  }
  // Second pass: means, then sample deviations.
  std::size_t k = 0;
  for (AggregateRow& agg : out) {
    if (agg.completed > 0) agg.mean_accuracy /= agg.completed;
    double ss = 0.0;
    const int total = agg.completed + agg.failed;
    for (int t = 0; t < total; ++t, ++k) {
      const SweepRow& row = result.rows[k];
      if (row.error.empty()) ss += (row.accuracy - agg.mean_accuracy) * (row.accuracy - agg.mean_accuracy);
    }
    agg.std_accuracy = agg.completed > 1 ? std::sqrt(ss / (agg.completed - 1)) : 0.0;
  }
  return out;
}

void write_results_csv(const SweepResult& result, std::ostream& out) {
  out << "dataset,variant,q,trial,accuracy,lambda,rho,rho_fraction,iterations,final_gap,error\n";
  for (const SweepRow& r : result.rows) {
    out << r.dataset << ',' << to_string(r.variant) << ',' << format_double(r.q) << ',' << r.trial
        << ',' << format_double(r.accuracy) << ',' << format_double(r.lambda) << ','
        << format_double(r.rho) << ',' << format_double(r.rho_fraction) << ',' << r.iterations
        << ',' << format_double(r.final_gap) << ',' << r.error << '\n';
  }
}

void write_timings_csv(const SweepResult& result, std::ostream& out) {
  out << "dataset,variant,q,trial,seconds,gram_seconds\n";
  for (const SweepRow& r : result.rows) {
    out << r.dataset << ',' << to_string(r.variant) << ',' << format_double(r.q) << ',' << r.trial
        << ',' << format_double(r.seconds) << ',' << format_double(r.gram_seconds) << '\n';
  }
}

void write_aggregate_csv(const std::vector<AggregateRow>& rows, std::ostream& out) {
  out << "dataset,variant,q,completed,failed,mean_accuracy,std_accuracy\n";
  for (const AggregateRow& r : rows) {
    out << r.dataset << ',' << to_string(r.variant) << ',' << format_double(r.q) << ','
        << r.completed << ',' << r.failed << ',' << format_double(r.mean_accuracy) << ','
        << format_double(r.std_accuracy) << '\n';
  }
}

double loglog_slope(const SolveTrace& trace, int from, int to) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  for (const TracePoint& p : trace.points) {
    if (p.iteration < from || p.iteration > to || !(p.gap > 0.0)) continue;
    const double x = std::log(static_cast<double>(p.iteration));
    const double y = std::log(p.gap);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) return std::numeric_limits<double>::quiet_NaN();
  const double denom = count * sxx - sx * sx;
  return (count * sxy - sx * sy) / denom;
}

ConvergenceReport bench_convergence(const Dataset& data, const ConvergenceConfig& config) {
  if (config.gamma0_grid.empty()) throw ArgumentError("bench_convergence: empty gamma0 grid");
  const KernelBank bank(build_bank(data.dim(), config.kernel_mode), data.features,
                        config.precision);
  const SaddleProblem prob(bank, data.labels, config.lambda, 1.0, config.rho);

  ConvergenceReport report;
  AmpOptions amp;
  amp.max_iters = config.iterations;
  amp.gap_tol = -std::numeric_limits<double>::infinity();
  amp.checkpoint_every = config.checkpoint_every;
  report.amp = amp_solve(prob, amp).trace;
  report.amp_slope = loglog_slope(report.amp, config.fit_from, config.fit_to);

  double best_gap = std::numeric_limits<double>::infinity();
  for (double g0 : config.gamma0_grid) {
    ViRun run;
    run.gamma0 = g0;
    ViOptions vi;
    vi.max_iters = config.iterations;
    vi.gap_tol = -std::numeric_limits<double>::infinity();
    vi.checkpoint_every = config.checkpoint_every;
    vi.gamma0 = g0;
    try {
      run.trace = vi_solve(prob, vi).trace;
      run.final_gap = run.trace.points.back().gap;
      run.slope = loglog_slope(run.trace, config.fit_from, config.fit_to);
    } catch (const SolverError& e) {
      run.final_gap = std::numeric_limits<double>::infinity();
      run.slope = std::numeric_limits<double>::quiet_NaN();
      run.error = e.what();
    }
    if (run.final_gap < best_gap) {
      best_gap = run.final_gap;
      report.best_vi = report.vi_runs.size();
    }
    report.vi_runs.push_back(std::move(run));
  }
  return report;
}

void write_gap_trace_csv(const SolveTrace& trace, std::ostream& out) {
  out << "iter,gap\n";
  for (const TracePoint& p : trace.points) out << p.iteration << ',' << format_double(p.gap) << '\n';
}

void write_manifest(const std::map<std::string, std::string>& entries,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
}

}  // namespace nmkl
