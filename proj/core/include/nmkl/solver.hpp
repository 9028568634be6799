#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nmkl/saddle.hpp"

namespace nmkl {

enum class SolveStatus { kGapConverged, kIterationCap };

std::string to_string(SolveStatus status);

struct TracePoint {
  int iteration = 0;
  double objective = 0.0;  // F at the averaged iterates
  double gap = 0.0;        // duality gap at the averaged iterates
  double seconds = 0.0;    // wall time since the solve started
};

struct SolveTrace {
  std::vector<TracePoint> points;
  SolveStatus status = SolveStatus::kIterationCap;
  int iterations = 0;
};

// CSV with header "iter,objective,gap,seconds". With include_time == false the
// seconds column is dropped so that the output is reproducible byte for byte.
void write_trace_csv(const SolveTrace& trace, std::ostream& out, bool include_time = true);

struct SolveResult {
  PrimalState primal;  // averaged primal iterate
  DualState dual;      // averaged dual iterate
  SolveTrace trace;
  GapReport gap;       // certificate at the returned pair
};

struct AmpOptions {
  int max_iters = 1000;
  double gap_tol = 1e-2;       // stop at the first checkpoint with gap <= gap_tol
  int checkpoint_every = 10;   // the last iteration is always a checkpoint
  std::optional<double> step;  // defaults to sqrt(n / (2 m))
  ProjectionMethod projection = ProjectionMethod::kBisection;
};

double default_step(const SaddleProblem& prob);

// Accelerated mirror prox. Starting from beta = 0, f = 0, every iteration does
//   alpha_t = P_Q[beta + step * r(f) / n]
//   f_hat   = f + (step / n) (alpha_t o y)  in every kernel block
//   f       = composite map of f_hat with step * lambda
//   beta    = P_Q[beta + step * r(f) / n]
// and returns the uniform averages of the f and alpha_t iterates.
// Throws SolverError on a non-finite iterate.
SolveResult amp_solve(const SaddleProblem& prob, const AmpOptions& options = {});

struct ViOptions {
  int max_iters = 1000;
  double gap_tol = 0.0;  // 0 runs all iterations
  int checkpoint_every = 10;
  double gamma0 = 1.0;   // step = gamma0 / sqrt(max_iters)
  ProjectionMethod projection = ProjectionMethod::kBisection;
};

// Simultaneous projected subgradient descent in f and ascent in alpha with a
// constant step; returns averaged iterates. The subgradient of R at a zero
// block is taken as zero.
SolveResult vi_solve(const SaddleProblem& prob, const ViOptions& options = {});

}  // namespace nmkl
