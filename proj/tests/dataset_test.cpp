#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "nmkl/dataset.hpp"
#include "nmkl/error.hpp"
#include "nmkl/random.hpp"

namespace nmkl {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("nmkl_dataset_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path file(const std::string& name, const std::string& contents) const {
    const fs::path p = path_ / name;
    std::ofstream(p) << contents;
    return p;
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

TEST(LoadDataset, CsvPreservesRowOrderAndLabels) {
  TempDir dir;
  const auto path = dir.file("three.csv", "1,0.5,2\n-1,1.5,3\n1,2.5,4\n");
  const Dataset d = load_dataset(path, FileFormat::kCsv);
  ASSERT_EQ(d.size(), 3);
  EXPECT_EQ(d.dim(), 2);
  EXPECT_EQ(d.labels(0), 1.0);
  EXPECT_EQ(d.labels(1), -1.0);
  EXPECT_EQ(d.labels(2), 1.0);
  EXPECT_EQ(d.features(1, 0), 1.5);
  EXPECT_EQ(d.name, "three");
}

TEST(LoadDataset, CsvHeaderIsDetected) {
  TempDir dir;
  const auto path = dir.file("h.csv", "label,a,b\n0,1,2\n1,3,4\n");
  const Dataset d = load_dataset(path, FileFormat::kCsv);
  ASSERT_EQ(d.size(), 2);
  EXPECT_EQ(d.labels(0), -1.0);  // 0 maps to -1
  EXPECT_EQ(d.labels(1), 1.0);
}

TEST(LoadDataset, SvmlightSparseRowsFillZeros) {
  TempDir dir;
  const auto path = dir.file("s.svm", "1 1:0.5 3:2.0\n-1 2:1\n");
  const Dataset d = load_dataset(path, FileFormat::kSvmlight, 3);
  ASSERT_EQ(d.dim(), 3);
  EXPECT_EQ(d.features(0, 0), 0.5);
  EXPECT_EQ(d.features(0, 1), 0.0);
  EXPECT_EQ(d.features(0, 2), 2.0);
  EXPECT_EQ(d.features(1, 1), 1.0);
}

TEST(LoadDataset, SvmlightInfersDimensionFromLargestIndex) {
  TempDir dir;
  const auto path = dir.file("s.svm", "+1 1:0.5 3:2.0\n-1 5:1 # comment\n");
  EXPECT_EQ(load_dataset(path, FileFormat::kSvmlight).dim(), 5);
}

TEST(LoadDataset, Errors) {
  TempDir dir;
  EXPECT_THROW(load_dataset(dir.file("bad_label.csv", "2,1\n1,2\n"), FileFormat::kCsv), DataError);
  EXPECT_THROW(load_dataset(dir.file("bad_feat.csv", "1,x\n-1,2\n"), FileFormat::kCsv), DataError);
  EXPECT_THROW(load_dataset(dir.file("ragged.csv", "1,1,2\n-1,2\n"), FileFormat::kCsv), DataError);
  EXPECT_THROW(load_dataset(dir.file("empty.csv", ""), FileFormat::kCsv), DataError);
  EXPECT_THROW(load_dataset(dir.file("bad.svm", "1 0:3\n-1 1:2\n"), FileFormat::kSvmlight), DataError);
  EXPECT_THROW(load_dataset(dir.file("bad2.svm", "1 1:a\n-1 1:2\n"), FileFormat::kSvmlight),
               DataError);
  EXPECT_THROW(load_dataset(dir.path() / "missing.csv", FileFormat::kCsv), DataError);
  EXPECT_THROW(parse_file_format("arff"), ArgumentError);
}

TEST(LoadDataset, CsvRoundTripIsBitExact) {
  TempDir dir;
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Dataset d = make_two_gaussians(17, 4, 1.0, 2, rng.next_u64());
    d.features(3, 1) = 1e-310;  // subnormal
    d.features(4, 2) = -0.1 * 3;
    const auto path = dir.path() / "rt.csv";
    write_csv(d, path);
    const Dataset back = load_dataset(path, FileFormat::kCsv);
    ASSERT_EQ(back.features.rows(), d.features.rows());
    EXPECT_TRUE((back.features.array() == d.features.array()).all());
    EXPECT_TRUE((back.labels.array() == d.labels.array()).all());
  }
}

TEST(MinMaxScale, ColumnExamples) {
  Dataset d;
  d.features.resize(3, 3);
  d.features << 1, 4, 0,  //
      3, 4, 1,            //
      5, 4, 0.5;
  d.labels = Eigen::Vector3d(1, -1, 1);
  const Dataset s = minmax_scale(d);
  EXPECT_DOUBLE_EQ(s.features(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(s.features(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(s.features(2, 0), 1.0);
  EXPECT_TRUE(s.features.col(1).isZero(0.0));  // constant column
  EXPECT_EQ(s.features(0, 2), 0.0);            // already spans [0, 1]
  EXPECT_EQ(s.features(1, 2), 1.0);
  EXPECT_EQ(s.features(2, 2), 0.5);
}

TEST(MinMaxScale, OutputInUnitIntervalForRandomInputs) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Dataset d;
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(30));
    d.features.resize(n, 5);
    for (Eigen::Index i = 0; i < d.features.size(); ++i) {
      d.features.data()[i] = (rng.uniform() - 0.5) * std::pow(10.0, rng.below(12) - 6.0);
    }
    d.labels = Eigen::VectorXd::Ones(n);
    const Dataset s = minmax_scale(d);
    EXPECT_GE(s.features.minCoeff(), 0.0);
    EXPECT_LE(s.features.maxCoeff(), 1.0);
  }
}

TEST(FlipLabels, ZeroNoiseIsIdentity) {
  const Dataset d = make_two_gaussians(50, 2, 1.0, 1, 3);
  const FlipResult r = flip_labels(d, {0.0, 99});
  EXPECT_TRUE((r.data.labels.array() == d.labels.array()).all());
  EXPECT_EQ(std::count(r.flip_mask.begin(), r.flip_mask.end(), true), 0);
}

TEST(FlipLabels, DeterministicAndConsistentWithMask) {
  const Dataset d = make_two_gaussians(200, 2, 1.0, 1, 3);
  const FlipResult a = flip_labels(d, {0.3, 1234});
  const FlipResult b = flip_labels(d, {0.3, 1234});
  EXPECT_EQ(a.flip_mask, b.flip_mask);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    EXPECT_EQ(a.data.labels(i), a.flip_mask[i] ? -d.labels(i) : d.labels(i));
  }
  EXPECT_NE(flip_labels(d, {0.3, 1235}).flip_mask, a.flip_mask);
}

TEST(FlipLabels, RejectsHalfOrMore) {
  const Dataset d = make_two_gaussians(10, 2, 1.0, 1, 3);
  EXPECT_THROW(flip_labels(d, {0.5, 1}), DataError);
  EXPECT_THROW(flip_labels(d, {-0.1, 1}), DataError);
}

// Binomial(10000, 0.3) has standard deviation ~45.8, so +-0.02 (200 flips) is
// about 4.4 sigma. Check the tolerance empirically over many seeds.
TEST(FlipLabels, FlipRateConcentrates) {
  Dataset d;
  d.features = Eigen::MatrixXd::Zero(10000, 1);
  d.labels = Eigen::VectorXd::Ones(10000);
  int within = 0;
  const int seeds = 300;
  for (int s = 0; s < seeds; ++s) {
    const FlipResult r = flip_labels(d, {0.3, static_cast<std::uint64_t>(s)});
    const double rate = std::count(r.flip_mask.begin(), r.flip_mask.end(), true) / 10000.0;
    within += std::abs(rate - 0.3) <= 0.02;
  }
  EXPECT_GE(within, static_cast<int>(0.99 * seeds));
}

TEST(Split, SizesForHundred) {
  const SplitResult s = split(100, 0.8, 0.1, 42);
  EXPECT_EQ(s.test.size(), 20u);
  EXPECT_EQ(s.validation.size(), 8u);
  EXPECT_EQ(s.train.size(), 72u);
}

TEST(Split, SmallestViableCase) {
  const SplitResult s = split(5, 0.8, 0.1, 1);
  EXPECT_EQ(s.test.size(), 1u);
  EXPECT_EQ(s.validation.size(), 1u);
  EXPECT_EQ(s.train.size(), 3u);
  EXPECT_THROW(split(1, 0.8, 0.1, 1), DataError);
}

TEST(Split, DeterministicGivenSeed) {
  const SplitResult a = split(57, 0.8, 0.1, 9);
  const SplitResult b = split(57, 0.8, 0.1, 9);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.validation, b.validation);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(split(57, 0.8, 0.1, 10).test, a.test);
}

TEST(Split, PartitionsAreDisjointAndExhaustive) {
  Rng rng(17);
  for (Eigen::Index n = 5; n < 300; n += 1 + static_cast<Eigen::Index>(rng.below(7))) {
    const SplitResult s = split(n, 0.8, 0.1, rng.next_u64());
    std::vector<Eigen::Index> all;
    all.insert(all.end(), s.train.begin(), s.train.end());
    all.insert(all.end(), s.validation.begin(), s.validation.end());
    all.insert(all.end(), s.test.begin(), s.test.end());
    std::sort(all.begin(), all.end());
    std::vector<Eigen::Index> expected(static_cast<std::size_t>(n));
    std::iota(expected.begin(), expected.end(), Eigen::Index{0});
    ASSERT_EQ(all, expected) << "n = " << n;
    EXPECT_FALSE(s.train.empty());
    EXPECT_FALSE(s.validation.empty());
    EXPECT_FALSE(s.test.empty());
  }
}

TEST(Subset, PicksRowsInOrder) {
  const Dataset d = make_two_gaussians(6, 2, 1.0, 1, 3);
  const Dataset s = subset(d, {4, 1});
  ASSERT_EQ(s.size(), 2);
  EXPECT_EQ(s.features.row(0), d.features.row(4));
  EXPECT_EQ(s.labels(1), d.labels(1));
}

TEST(Validate, RejectsBadLabelsAndNonFinite) {
  Dataset d = make_two_gaussians(6, 2, 1.0, 1, 3);
  d.labels(2) = 0.5;
  EXPECT_THROW(validate(d), DataError);
  d = make_two_gaussians(6, 2, 1.0, 1, 3);
  d.features(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(validate(d), DataError);
}

}  // namespace
}  // namespace nmkl
