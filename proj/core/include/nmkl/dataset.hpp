#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nmkl {

// Binary classification data: one row per example, labels in {-1, +1}.
struct Dataset {
  Eigen::MatrixXd features;  // n x d
  Eigen::VectorXd labels;    // n, each exactly -1 or +1
  std::string name;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
};

// Throws DataError unless n >= 2, d >= 1, labels are +-1 and features finite.
void validate(const Dataset& data);

enum class FileFormat { kCsv, kSvmlight };

FileFormat parse_file_format(const std::string& name);

// Reads a labelled dataset.
//
// CSV: first column is the label, the remaining columns are features. A header
// row is detected when its first field is not numeric. svmlight: lines of the
// form "label idx:val idx:val ..." with 1-based indices; `dim` fixes d,
// otherwise d is the largest index seen. Labels 0/1 map to -1/+1.
Dataset load_dataset(const std::filesystem::path& path, FileFormat format,
                     std::optional<Eigen::Index> dim = std::nullopt);

// Writes CSV (label first, no header) using shortest round-trip formatting, so
// load_dataset(write_csv(D)) reproduces D bit for bit.
void write_csv(const Dataset& data, const std::filesystem::path& path);

// Per-column affine map x -> (x - min) / (max - min); constant columns map to 0.
struct MinMaxScaler {
  Eigen::VectorXd min;
  Eigen::VectorXd range;  // max - min; zero for constant columns

  static MinMaxScaler fit(const Eigen::MatrixXd& features);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& features) const;
};

Dataset minmax_scale(const Dataset& data);

struct NoiseSpec {
  double q = 0.0;  // flip probability, must lie in [0, 0.5)
  std::uint64_t seed = 0;
};

struct FlipResult {
  Dataset data;
  std::vector<bool> flip_mask;
};

// Negates each label independently with probability q.
FlipResult flip_labels(const Dataset& data, const NoiseSpec& spec);

struct SplitResult {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> validation;
  std::vector<Eigen::Index> test;
};

// Random partition of {0..n-1}. |test| = round_half_up((1 - train_frac) n);
// |validation| = round_half_up(validation_frac * (n - |test|)), raised to 1 when
// validation_frac > 0 and the rounding gives 0. Each index set is sorted.
SplitResult split(Eigen::Index n, double train_frac, double validation_frac,
                  std::uint64_t seed);

inline SplitResult split(const Dataset& data, double train_frac, double validation_frac,
                         std::uint64_t seed) {
  return split(data.size(), train_frac, validation_frac, seed);
}

// Rows of `data` at `indices`, in that order.
Dataset subset(const Dataset& data, const std::vector<Eigen::Index>& indices);

// Two isotropic Gaussian classes with means at -/+ separation/2 along the
// first `informative` coordinates; the remaining coordinates are pure noise.
// Classes are balanced (alternating labels).
Dataset make_two_gaussians(Eigen::Index n, Eigen::Index d, double separation,
                           Eigen::Index informative, std::uint64_t seed);

}  // namespace nmkl
