#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nmkl {

// How a Gaussian width w enters the kernel.
//   kSigma:            k(x, x') = exp(-|x - x'|^2 / (2 w^2))   (default)
//   kInverseBandwidth: k(x, x') = exp(-w |x - x'|^2)
enum class KernelMode { kSigma, kInverseBandwidth };

KernelMode parse_kernel_mode(const std::string& name);
std::string to_string(KernelMode mode);

struct KernelSpec {
  double width = 1.0;
  // Zero-based feature index for a single-feature kernel; empty means all features.
  std::optional<Eigen::Index> feature;
  KernelMode mode = KernelMode::kSigma;

  bool operator==(const KernelSpec&) const = default;
};

// The ten widths 2^-3 .. 2^6.
std::vector<double> width_grid();

// 10 (d + 1) specs: scope-major (all features first, then feature 0 .. d-1),
// width-minor in ascending order.
std::vector<KernelSpec> build_bank(Eigen::Index d, KernelMode mode = KernelMode::kSigma);

// Symmetric Gram matrix over the rows of X. Each unordered pair is evaluated
// once, so the result is exactly symmetric with a unit diagonal.
Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& X);

// Kernel values between training rows (rows of the result) and query rows
// (columns of the result).
Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Eigen::MatrixXd& X_train,
                           const Eigen::MatrixXd& X_query);

// c^T K c clamped at zero.
double rkhs_norm_sq(const Eigen::Ref<const Eigen::VectorXd>& c, const Eigen::MatrixXd& K);

enum class GramPrecision { kDouble, kFloat };

// Precomputed Gram matrices for a list of kernel specs over fixed training rows.
// Immutable after construction and safe to share between threads.
class KernelBank {
 public:
  KernelBank() = default;

  // Builds every Gram matrix, splitting specs across `jobs` threads
  // (0 means std::thread::hardware_concurrency()).
  KernelBank(std::vector<KernelSpec> specs, const Eigen::MatrixXd& X,
             GramPrecision precision = GramPrecision::kDouble, unsigned jobs = 1);

  // Wraps explicit matrices (tests, cache loading). Each must be n x n.
  static KernelBank from_matrices(std::vector<KernelSpec> specs,
                                  std::vector<Eigen::MatrixXd> grams);

  Eigen::Index size() const { return static_cast<Eigen::Index>(specs_.size()); }
  Eigen::Index num_points() const { return n_; }
  GramPrecision precision() const { return precision_; }
  const std::vector<KernelSpec>& specs() const { return specs_; }

  // Gram matrix j at double precision (a converted copy for float storage).
  Eigen::MatrixXd gram(Eigen::Index j) const;

  // out = K_j v
  void apply(Eigen::Index j, const Eigen::Ref<const Eigen::VectorXd>& v,
             Eigen::Ref<Eigen::VectorXd> out) const;
  Eigen::VectorXd apply(Eigen::Index j, const Eigen::Ref<const Eigen::VectorXd>& v) const;

  // c^T K_j c clamped at zero.
  double norm_sq(Eigen::Index j, const Eigen::Ref<const Eigen::VectorXd>& c) const;

  // Versioned binary cache: magic "NMKLGRAM", format version, n, m, precision,
  // the specs, then each Gram in column-major order.
  void save(const std::filesystem::path& path) const;
  static KernelBank load(const std::filesystem::path& path);

 private:
  std::vector<KernelSpec> specs_;
  std::vector<Eigen::MatrixXd> grams_;
  std::vector<Eigen::MatrixXf> grams_f_;
  Eigen::Index n_ = 0;
  GramPrecision precision_ = GramPrecision::kDouble;
};

}  // namespace nmkl
