#include <cmath>

#include <gtest/gtest.h>

#include "nmkl/error.hpp"
#include "nmkl/trainers.hpp"
#include "oracles.hpp"

namespace nmkl {
namespace {

TEST(ComputeTau, Examples) {
  EXPECT_EQ(compute_tau(1.0), 0.0);
  EXPECT_NEAR(compute_tau(std::exp(-2.0)), 1.0, 1e-15);
  EXPECT_NEAR(compute_tau(0.01), 1.517427, 1e-6);
  EXPECT_THROW(compute_tau(0.0), ArgumentError);
  EXPECT_THROW(compute_tau(1.5), ArgumentError);
}

TEST(ComputeRho, Examples) {
  EXPECT_DOUBLE_EQ(compute_rho(37, 0.0, 0.0), 37.0);
  EXPECT_NEAR(compute_rho(100, 0.2, 1.0), 190.0, 1e-12);
  EXPECT_NEAR(compute_rho(100, 0.2, compute_tau(0.01)), 246.9, 0.05);
  // Clamped to n * cap.
  EXPECT_DOUBLE_EQ(compute_rho(100, 0.0, 1.0, 1.0), 100.0);
}

TEST(RobustWeights, Examples) {
  const Eigen::Vector3d losses(0, 2, 0.5);
  EXPECT_EQ(robust_weights(losses, 2.0), Eigen::Vector3d(1, 0, 1));
  EXPECT_EQ(robust_weights(losses, 1.5), Eigen::Vector3d(1, 0, 0.5));
}

TEST(RobustWeights, MatchesLpOracle) {
  Rng rng(401);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.below(8));
    const Eigen::VectorXd losses = oracle::random_vector(rng, n, 0.0, 2.5);
    const double budget = rng.uniform() * n;
    const Eigen::VectorXd p = robust_weights(losses, budget);
    // min sum p (l - 1)  ==  -max sum p (1 - l)
    const Eigen::VectorXd gain = (1.0 - losses.array()).matrix();
    const oracle::LpSolution lp = oracle::lp_box_budget(gain, Eigen::VectorXd::Ones(n), budget);
    ASSERT_TRUE(lp.bounded);
    EXPECT_NEAR(p.dot(gain), lp.value, 1e-8) << "trial " << trial;
    EXPECT_LE(p.sum(), budget + 1e-12);
    EXPECT_GE(p.minCoeff(), 0.0);
    EXPECT_LE(p.maxCoeff(), 1.0);
  }
}

TEST(RobustObjective, Formula) {
  const Eigen::Vector2d losses(0.5, 2.0);
  const Eigen::Vector2d p(1.0, 0.0);
  EXPECT_DOUBLE_EQ(robust_objective(losses, p, 0.25), (0.5 + 1.0) / 2.0 + 0.25);
}

Dataset noisy_gaussians(Eigen::Index n, std::uint64_t seed, double q) {
  Dataset d = minmax_scale(make_two_gaussians(n, 2, 2.0, 2, seed));
  return flip_labels(d, {q, seed + 1}).data;
}

TrainConfig fast_config(Variant v) {
  TrainConfig c;
  c.variant = v;
  c.max_iters = 300;
  c.checkpoint_every = 10;
  return c;
}

TEST(Train, NoiselessStPMKLReproducesSiPMKLBitwise) {
  const Dataset d = noisy_gaussians(40, 7, 0.0);
  const KernelBank bank(build_bank(2), d.features);
  TrainConfig st = fast_config(Variant::kStPMKL);
  TrainConfig si = fast_config(Variant::kSiPMKL);
  for (DualMode mode : {DualMode::kAbsorbed, DualMode::kFaithful}) {
    st.dual_mode = mode;
    st.epsilon_chance = 1.0;  // tau = 0
    const TrainResult a = train(d, bank, st, {0.1, 1.0});
    const TrainResult b = train(d, bank, si, {0.1, 1.0});
    ASSERT_EQ(a.trace.points.size(), b.trace.points.size());
    for (std::size_t k = 0; k < a.trace.points.size(); ++k) {
      EXPECT_EQ(a.trace.points[k].objective, b.trace.points[k].objective);
      EXPECT_EQ(a.trace.points[k].gap, b.trace.points[k].gap);
    }
    EXPECT_TRUE((a.model.coef.array() == b.model.coef.array()).all());
  }
}

TEST(Train, FaithfulModeUsesInflatedCapsAndRho) {
  const Dataset d = noisy_gaussians(30, 8, 0.2);
  const KernelBank bank(build_bank(2), d.features);
  TrainConfig c = fast_config(Variant::kStPMKL);
  c.dual_mode = DualMode::kFaithful;
  c.q = 0.2;
  c.epsilon_chance = 0.01;
  const SaddleProblem prob = make_problem(bank, d.labels, c, {0.1, 1.0});
  const double tau = compute_tau(0.01);
  EXPECT_DOUBLE_EQ(prob.caps()(0), 1.0 + tau);
  EXPECT_DOUBLE_EQ(prob.rho(), compute_rho(30, 0.2, tau));
}

TEST(Train, ConvergedSolvesReportGapBelowTolerance) {
  const Dataset d = noisy_gaussians(40, 9, 0.1);
  const KernelBank bank(build_bank(2), d.features);
  for (Variant v : {Variant::kStPMKL, Variant::kSiPMKL}) {
    TrainConfig c = fast_config(v);
    c.max_iters = 2000;
    const TrainResult r = train(d, bank, c, {1.0, 0.8});
    if (r.model.status == SolveStatus::kGapConverged) EXPECT_LE(r.gap.gap, c.gap_tol);
  }
}

TEST(Train, MiPMKLObjectiveIsNonIncreasing) {
  Rng rng(402);
  int with_rounds = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset d = noisy_gaussians(20 + static_cast<Eigen::Index>(rng.below(20)), rng.next_u64() % 1000, 0.2);
    const KernelBank bank(build_bank(2), d.features);
    TrainConfig c = fast_config(Variant::kMiPMKL);
    c.q = 0.2;
    const TrainResult r = train(d, bank, c, {0.1, 1.0});
    with_rounds += !r.robust_objective.empty();
    for (std::size_t k = 1; k < r.robust_objective.size(); ++k) {
      EXPECT_LE(r.robust_objective[k], r.robust_objective[k - 1] + 1e-12);
    }
    // Never worse than the all-zero start (objective 1).
    for (double v : r.robust_objective) EXPECT_LE(v, 1.0 + 1e-12);
  }
  EXPECT_GT(with_rounds, 10);
}

TEST(Train, RejectsMismatchedBank) {
  const Dataset d = noisy_gaussians(20, 1, 0.0);
  const Dataset other = noisy_gaussians(21, 1, 0.0);
  const KernelBank bank(build_bank(2), other.features);
  EXPECT_THROW(train(d, bank, fast_config(Variant::kStPMKL), {}), ArgumentError);
  TrainConfig bad = fast_config(Variant::kStPMKL);
  bad.q = 0.5;
  EXPECT_THROW(bad.validate(), ArgumentError);
}

TEST(SearchGrid, Shapes) {
  TrainConfig c;
  EXPECT_EQ(search_grid(c).size(), 30u);
  c.variant = Variant::kSiPMKL;
  EXPECT_EQ(search_grid(c).size(), 5u);
  c.variant = Variant::kStPMKL;
  c.dual_mode = DualMode::kFaithful;
  EXPECT_EQ(search_grid(c).size(), 5u);
}

TEST(ModelSelect, SinglePointGridReturnsThatPair) {
  const Dataset d = noisy_gaussians(40, 3, 0.0);
  const SplitResult s = split(d, 0.8, 0.2, 1);
  const Dataset tr = subset(d, s.train);
  const KernelBank bank(build_bank(2), tr.features);
  TrainConfig c = fast_config(Variant::kStPMKL);
  c.lambda_grid = {0.1};
  c.rho_fraction_grid = {0.7};
  const Selection sel = model_select(tr, bank, subset(d, s.validation), c);
  EXPECT_EQ(sel.best.lambda, 0.1);
  EXPECT_EQ(sel.best.rho_fraction, 0.7);
  EXPECT_EQ(sel.cells.size(), 1u);
}

TEST(ModelSelect, TiesPreferLargerLambdaAndParallelMatchesSerial) {
  // Identical labels everywhere: every cell predicts the majority class on
  // the validation rows or better, and many cells tie.
  const Dataset d = noisy_gaussians(40, 4, 0.0);
  const SplitResult s = split(d, 0.8, 0.2, 2);
  const Dataset tr = subset(d, s.train);
  const Dataset va = subset(d, s.validation);
  const KernelBank bank(build_bank(2), tr.features);
  TrainConfig c = fast_config(Variant::kStPMKL);
  c.lambda_grid = {1e-2, 1e-1};
  c.rho_fraction_grid = {1.0, 0.5};
  const Selection serial = model_select(tr, bank, va, c);
  double best_acc = 0.0;
  for (const auto& cell : serial.cells) best_acc = std::max(best_acc, cell.validation_accuracy);
  Hyper expected{0.0, 0.0};
  for (const auto& cell : serial.cells) {
    if (cell.validation_accuracy != best_acc) continue;
    if (cell.hyper.lambda > expected.lambda ||
        (cell.hyper.lambda == expected.lambda && cell.hyper.rho_fraction > expected.rho_fraction)) {
      expected = cell.hyper;
    }
  }
  EXPECT_EQ(serial.best.lambda, expected.lambda);
  EXPECT_EQ(serial.best.rho_fraction, expected.rho_fraction);

  c.jobs = 3;
  const Selection parallel = model_select(tr, bank, va, c);
  EXPECT_EQ(parallel.best.lambda, serial.best.lambda);
  EXPECT_EQ(parallel.best.rho_fraction, serial.best.rho_fraction);
  EXPECT_TRUE((parallel.result.model.coef.array() == serial.result.model.coef.array()).all());
}

TEST(Predict, Invariants) {
  const Dataset d = noisy_gaussians(30, 5, 0.1);
  const KernelBank bank(build_bank(2), d.features);
  const TrainResult r = train(d, bank, fast_config(Variant::kStPMKL), {0.1, 1.0});

  // Scores on training rows match the solver's cached f(x_i).
  const Prediction p = predict(r.model, d.features);
  EXPECT_LE((p.scores - r.decision_values).cwiseAbs().maxCoeff(), 1e-8);

  // Positive rescaling leaves labels unchanged.
  Model scaled = r.model;
  scaled.coef *= 3.5;
  EXPECT_EQ(predict(scaled, d.features).labels, p.labels);

  // Zero model: scores 0, labels +1.
  Model zero = r.model;
  zero.coef.setZero();
  const Prediction z = predict(zero, d.features);
  EXPECT_TRUE(z.scores.isZero(0.0));
  EXPECT_TRUE(z.labels.isOnes(0.0));

  EXPECT_THROW(predict(r.model, Eigen::MatrixXd::Zero(2, 3)), ArgumentError);
}

TEST(Predict, ScalerIsAppliedToRawRows) {
  Dataset raw = make_two_gaussians(30, 2, 2.0, 2, 6);
  raw.features = raw.features * 10.0 + Eigen::MatrixXd::Constant(30, 2, 5.0);
  const MinMaxScaler scaler = MinMaxScaler::fit(raw.features);
  Dataset scaled = raw;
  scaled.features = scaler.apply(raw.features);
  const KernelBank bank(build_bank(2), scaled.features);
  TrainResult r = train(scaled, bank, fast_config(Variant::kSiPMKL), {0.1, 1.0});
  const Prediction on_scaled = predict(r.model, scaled.features);
  r.model.scaler = scaler;
  const Prediction on_raw = predict(r.model, raw.features);
  EXPECT_LE((on_raw.scores - on_scaled.scores).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Accuracy, Basic) {
  EXPECT_DOUBLE_EQ(accuracy(Eigen::Vector4d(1, -1, 1, 1), Eigen::Vector4d(1, 1, 1, -1)), 0.5);
  EXPECT_THROW(accuracy(Eigen::Vector2d(1, 1), Eigen::Vector3d(1, 1, 1)), ArgumentError);
}

TEST(Variant, ParseRoundTrip) {
  for (Variant v : {Variant::kStPMKL, Variant::kSiPMKL, Variant::kMiPMKL}) {
    EXPECT_EQ(parse_variant(to_string(v)), v);
  }
  EXPECT_THROW(parse_variant("svm"), ArgumentError);
}

}  // namespace
}  // namespace nmkl
