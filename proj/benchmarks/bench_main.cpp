#include <benchmark/benchmark.h>

#include "nmkl/composite_map.hpp"
#include "nmkl/dataset.hpp"
#include "nmkl/kernel_bank.hpp"
#include "nmkl/polytope.hpp"
#include "nmkl/random.hpp"
#include "nmkl/solver.hpp"

namespace {

using namespace nmkl;

Eigen::VectorXd random_target(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 3.0 * rng.uniform() - 1.0;
  return v;
}

void BM_ProjectDual(benchmark::State& state, ProjectionMethod method) {
  const Eigen::Index n = state.range(0);
  const Eigen::VectorXd target = random_target(n, 1);
  const Eigen::VectorXd caps = Eigen::VectorXd::Ones(n);
  const double rho = 0.3 * static_cast<double>(n);
  for (auto _ : state) benchmark::DoNotOptimize(project_dual(target, caps, rho, method));
  state.SetComplexityN(n);
}
BENCHMARK_CAPTURE(BM_ProjectDual, bisection, ProjectionMethod::kBisection)
    ->RangeMultiplier(4)
    ->Range(64, 16384)
    ->Complexity();
BENCHMARK_CAPTURE(BM_ProjectDual, sorted, ProjectionMethod::kSorted)
    ->RangeMultiplier(4)
    ->Range(64, 16384)
    ->Complexity();

void BM_GroupShrinkage(benchmark::State& state) {
  const Eigen::VectorXd a = random_target(state.range(0), 2).cwiseAbs();
  const std::vector<double> norms(a.data(), a.data() + a.size());
  for (auto _ : state) benchmark::DoNotOptimize(group_shrinkage(norms, 0.05));
}
BENCHMARK(BM_GroupShrinkage)->Arg(50)->Arg(140)->Arg(1000);

Dataset bench_data(Eigen::Index n, Eigen::Index d) {
  return minmax_scale(make_two_gaussians(n, d, 1.5, 2, 3));
}

void BM_GramBank(benchmark::State& state) {
  const Dataset data = bench_data(state.range(0), 4);
  for (auto _ : state) {
    const KernelBank bank(build_bank(data.dim()), data.features);
    benchmark::DoNotOptimize(bank.size());
  }
}
BENCHMARK(BM_GramBank)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

// Time per solver iteration on a 50-kernel bank.
void BM_SolverIterations(benchmark::State& state, bool amp, GramPrecision precision) {
  const Dataset data = bench_data(state.range(0), 4);
  const KernelBank bank(build_bank(data.dim()), data.features, precision);
  const SaddleProblem prob(bank, data.labels, 0.01, 1.0, 0.5 * data.size());
  constexpr int kIters = 20;
  for (auto _ : state) {
    if (amp) {
      AmpOptions o;
      o.max_iters = kIters;
      o.gap_tol = 0.0;
      o.checkpoint_every = kIters;
      benchmark::DoNotOptimize(amp_solve(prob, o).gap.gap);
    } else {
      ViOptions o;
      o.max_iters = kIters;
      o.checkpoint_every = kIters;
      benchmark::DoNotOptimize(vi_solve(prob, o).gap.gap);
    }
  }
  state.SetItemsProcessed(state.iterations() * kIters);
}
BENCHMARK_CAPTURE(BM_SolverIterations, amp_double, true, GramPrecision::kDouble)
    ->Arg(100)
    ->Arg(300)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_SolverIterations, amp_float, true, GramPrecision::kFloat)
    ->Arg(100)
    ->Arg(300)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_SolverIterations, vi_double, false, GramPrecision::kDouble)
    ->Arg(100)
    ->Arg(300)
    ->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
