#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "nmkl/dataset.hpp"
#include "nmkl/error.hpp"
#include "nmkl/kernel_bank.hpp"
#include "nmkl/random.hpp"

namespace nmkl {
namespace {

Eigen::MatrixXd random_points(Rng& rng, Eigen::Index n, Eigen::Index d) {
  Eigen::MatrixXd X(n, d);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform();
  return X;
}

TEST(BuildBank, CountsAndOrder) {
  EXPECT_EQ(build_bank(13).size(), 140u);
  EXPECT_EQ(build_bank(1).size(), 20u);
  const auto specs = build_bank(2);
  const auto widths = width_grid();
  ASSERT_EQ(widths.size(), 10u);
  EXPECT_EQ(widths.front(), 0.125);
  EXPECT_EQ(widths.back(), 64.0);
  for (std::size_t k = 0; k < specs.size(); ++k) {
    EXPECT_EQ(specs[k].width, widths[k % 10]);
    if (k < 10) {
      EXPECT_FALSE(specs[k].feature.has_value());
    } else {
      ASSERT_TRUE(specs[k].feature.has_value());
      EXPECT_EQ(*specs[k].feature, static_cast<Eigen::Index>(k / 10 - 1));
    }
  }
}

TEST(Gram, UnitDistanceValue) {
  Eigen::MatrixXd X(2, 1);
  X << 0.0, 1.0;
  const Eigen::MatrixXd K = gram({1.0, std::nullopt, KernelMode::kSigma}, X);
  EXPECT_NEAR(K(0, 1), 0.606531, 1e-6);
  EXPECT_EQ(K(0, 0), 1.0);
  const Eigen::MatrixXd Ki = gram({1.0, std::nullopt, KernelMode::kInverseBandwidth}, X);
  EXPECT_NEAR(Ki(0, 1), std::exp(-1.0), 1e-15);
}

TEST(Gram, SymmetricUnitDiagonalAndPsd) {
  Rng rng(2);
  const Eigen::MatrixXd X = random_points(rng, 40, 3);
  for (const KernelSpec& spec : build_bank(3)) {
    const Eigen::MatrixXd K = gram(spec, X);
    EXPECT_TRUE((K.array() == K.transpose().array()).all());
    EXPECT_TRUE((K.diagonal().array() == 1.0).all());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8 * K.rows());
  }
}

TEST(Gram, SingleFeatureKernelIgnoresOtherFeatures) {
  Rng rng(3);
  Eigen::MatrixXd X = random_points(rng, 10, 3);
  const KernelSpec spec{0.5, Eigen::Index{1}, KernelMode::kSigma};
  const Eigen::MatrixXd before = gram(spec, X);
  X.col(0).setRandom();
  X.col(2).setRandom();
  EXPECT_TRUE((gram(spec, X).array() == before.array()).all());
}

TEST(CrossGram, MatchesGramOnTrainingRows) {
  Rng rng(4);
  const Eigen::MatrixXd X = random_points(rng, 12, 2);
  for (const KernelSpec& spec : build_bank(2)) {
    const Eigen::MatrixXd K = gram(spec, X);
    const Eigen::MatrixXd C = cross_gram(spec, X, X);
    EXPECT_LE((K - C).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(RkhsNorm, Examples) {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_DOUBLE_EQ(rkhs_norm_sq(Eigen::Vector2d(3, 4), I), 25.0);
  EXPECT_EQ(rkhs_norm_sq(Eigen::Vector2d(0, 0), I), 0.0);
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(2, 2);
  EXPECT_EQ(rkhs_norm_sq(Eigen::Vector2d(1, -1), ones), 0.0);
}

TEST(KernelBank, ApplyAndNormMatchExplicitGram) {
  Rng rng(5);
  const Eigen::MatrixXd X = random_points(rng, 25, 2);
  const KernelBank bank(build_bank(2), X, GramPrecision::kDouble, 3);
  ASSERT_EQ(bank.size(), 30);
  const Eigen::VectorXd v = Eigen::VectorXd::Random(25);
  for (Eigen::Index j = 0; j < bank.size(); ++j) {
    const Eigen::MatrixXd K = gram(bank.specs()[j], X);
    EXPECT_TRUE((bank.gram(j).array() == K.array()).all());
    EXPECT_LE((bank.apply(j, v) - K * v).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(bank.norm_sq(j, v), v.dot(K * v), 1e-12);
  }
}

TEST(KernelBank, FloatStorageIsClose) {
  Rng rng(6);
  const Eigen::MatrixXd X = random_points(rng, 20, 2);
  const KernelBank d(build_bank(2), X, GramPrecision::kDouble);
  const KernelBank f(build_bank(2), X, GramPrecision::kFloat);
  for (Eigen::Index j = 0; j < d.size(); ++j) {
    EXPECT_LE((d.gram(j) - f.gram(j)).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(KernelBank, ThreadCountDoesNotChangeResult) {
  Rng rng(7);
  const Eigen::MatrixXd X = random_points(rng, 15, 3);
  const KernelBank a(build_bank(3), X, GramPrecision::kDouble, 1);
  const KernelBank b(build_bank(3), X, GramPrecision::kDouble, 4);
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    EXPECT_TRUE((a.gram(j).array() == b.gram(j).array()).all());
  }
}

TEST(KernelBank, CacheRoundTrip) {
  Rng rng(8);
  const Eigen::MatrixXd X = random_points(rng, 9, 2);
  const auto path = std::filesystem::temp_directory_path() / "nmkl_kernel_cache_test.bin";
  for (GramPrecision p : {GramPrecision::kDouble, GramPrecision::kFloat}) {
    const KernelBank bank(build_bank(2, KernelMode::kInverseBandwidth), X, p);
    bank.save(path);
    const KernelBank back = KernelBank::load(path);
    EXPECT_EQ(back.specs(), bank.specs());
    EXPECT_EQ(back.precision(), p);
    for (Eigen::Index j = 0; j < bank.size(); ++j) {
      EXPECT_TRUE((back.gram(j).array() == bank.gram(j).array()).all());
    }
  }
  std::ofstream(path, std::ios::binary) << "NOTAGRAM";
  EXPECT_THROW(KernelBank::load(path), Error);
  std::filesystem::remove(path);
}

TEST(KernelBank, FromMatricesRejectsBadShapes) {
  std::vector<KernelSpec> specs(2);
  EXPECT_THROW(KernelBank::from_matrices(specs, {Eigen::MatrixXd::Identity(3, 3),
                                                 Eigen::MatrixXd::Identity(2, 2)}),
               Error);
  EXPECT_THROW(KernelBank::from_matrices(specs, {Eigen::MatrixXd::Identity(3, 3)}), Error);
}

TEST(KernelMode, ParseRoundTrip) {
  EXPECT_EQ(parse_kernel_mode(to_string(KernelMode::kSigma)), KernelMode::kSigma);
  EXPECT_EQ(parse_kernel_mode(to_string(KernelMode::kInverseBandwidth)),
            KernelMode::kInverseBandwidth);
  EXPECT_THROW(parse_kernel_mode("gamma"), ArgumentError);
}

}  // namespace
}  // namespace nmkl
