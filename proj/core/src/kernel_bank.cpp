#include "nmkl/kernel_bank.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <thread>

#include "nmkl/error.hpp"

namespace nmkl {
namespace {

constexpr char kCacheMagic[8] = {'N', 'M', 'K', 'L', 'G', 'R', 'A', 'M'};
constexpr std::uint32_t kCacheVersion = 1;

double squared_distance(const Eigen::MatrixXd& A, Eigen::Index i, const Eigen::MatrixXd& B,
                        Eigen::Index k, const std::optional<Eigen::Index>& feature) {
  if (feature) {
    const double diff = A(i, *feature) - B(k, *feature);
    return diff * diff;
  }
  double sum = 0.0;
  for (Eigen::Index c = 0; c < A.cols(); ++c) {
    const double diff = A(i, c) - B(k, c);
    sum += diff * diff;
  }
  return sum;
}

double kernel_value(double sq_dist, const KernelSpec& spec) {
  switch (spec.mode) {
    case KernelMode::kInverseBandwidth:
      return std::exp(-spec.width * sq_dist);
    case KernelMode::kSigma:
    default:
      return std::exp(-sq_dist / (2.0 * spec.width * spec.width));
  }
}

void check_spec(const KernelSpec& spec, Eigen::Index d) {
  if (!(spec.width > 0.0)) throw ArgumentError("kernel width must be positive");
  if (spec.feature && (*spec.feature < 0 || *spec.feature >= d)) {
    throw ArgumentError("kernel feature index " + std::to_string(*spec.feature + 1) +
                        " out of range for d = " + std::to_string(d));
  }
}

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError("truncated Gram cache file");
  return value;
}

}  // namespace

KernelMode parse_kernel_mode(const std::string& name) {
  if (name == "sigma") return KernelMode::kSigma;
  if (name == "inverse") return KernelMode::kInverseBandwidth;
  throw ArgumentError("unknown kernel mode '" + name + "' (expected sigma or inverse)");
}

std::string to_string(KernelMode mode) {
  return mode == KernelMode::kSigma ? "sigma" : "inverse";
}

std::vector<double> width_grid() {
  std::vector<double> widths;
  for (int e = -3; e <= 6; ++e) widths.push_back(std::ldexp(1.0, e));
  return widths;
}

std::vector<KernelSpec> build_bank(Eigen::Index d, KernelMode mode) {
  if (d < 1) throw ArgumentError("build_bank: need at least one feature");
  const auto widths = width_grid();
  std::vector<KernelSpec> specs;
  specs.reserve(static_cast<std::size_t>(widths.size() * (d + 1)));
  for (double w : widths) specs.push_back({w, std::nullopt, mode});
  for (Eigen::Index j = 0; j < d; ++j) {
    for (double w : widths) specs.push_back({w, j, mode});
  }
  return specs;
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& X) {
  check_spec(spec, X.cols());
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    K(k, k) = 1.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double v = kernel_value(squared_distance(X, i, X, k, spec.feature), spec);
      K(i, k) = v;
      K(k, i) = v;
    }
  }
  return K;
}

Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Eigen::MatrixXd& X_train,
                           const Eigen::MatrixXd& X_query) {
  if (X_train.cols() != X_query.cols()) {
    throw ArgumentError("cross_gram: training rows have " + std::to_string(X_train.cols()) +
                        " features, query rows have " + std::to_string(X_query.cols()));
  }
  check_spec(spec, X_train.cols());
  Eigen::MatrixXd K(X_train.rows(), X_query.rows());
  for (Eigen::Index k = 0; k < X_query.rows(); ++k) {
    for (Eigen::Index i = 0; i < X_train.rows(); ++i) {
      K(i, k) = kernel_value(squared_distance(X_train, i, X_query, k, spec.feature), spec);
    }
  }
  return K;
}

double rkhs_norm_sq(const Eigen::Ref<const Eigen::VectorXd>& c, const Eigen::MatrixXd& K) {
  if (K.rows() != c.size() || K.cols() != c.size()) {
    throw ArgumentError("rkhs_norm_sq: coefficient length does not match Gram size");
  }
  return std::max(0.0, c.dot(K * c));
}

KernelBank::KernelBank(std::vector<KernelSpec> specs, const Eigen::MatrixXd& X,
                       GramPrecision precision, unsigned jobs)
    : specs_(std::move(specs)), n_(X.rows()), precision_(precision) {
  for (const auto& s : specs_) check_spec(s, X.cols());
  const std::size_t m = specs_.size();
  if (precision_ == GramPrecision::kDouble) {
    grams_.resize(m);
  } else {
    grams_f_.resize(m);
  }
  auto build_one = [&](std::size_t j) {
    if (precision_ == GramPrecision::kDouble) {
      grams_[j] = nmkl::gram(specs_[j], X);
    } else {
      grams_f_[j] = nmkl::gram(specs_[j], X).cast<float>();
    }
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(m, 1)));
  if (jobs <= 1) {
    for (std::size_t j = 0; j < m; ++j) build_one(j);
    return;
  }
  std::vector<std::jthread> workers;
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t j = w; j < m; j += jobs) build_one(j);
    });
  }
}

KernelBank KernelBank::from_matrices(std::vector<KernelSpec> specs,
                                     std::vector<Eigen::MatrixXd> grams) {
  if (specs.size() != grams.size()) {
    throw ArgumentError("KernelBank: spec count and Gram count differ");
  }
  KernelBank bank;
  bank.n_ = grams.empty() ? 0 : grams.front().rows();
  for (const auto& K : grams) {
    if (K.rows() != bank.n_ || K.cols() != bank.n_) {
      throw ArgumentError("KernelBank: Gram matrices must all be n x n");
    }
  }
  bank.specs_ = std::move(specs);
  bank.grams_ = std::move(grams);
  return bank;
}

Eigen::MatrixXd KernelBank::gram(Eigen::Index j) const {
  if (precision_ == GramPrecision::kDouble) return grams_[static_cast<std::size_t>(j)];
  return grams_f_[static_cast<std::size_t>(j)].cast<double>();
}

void KernelBank::apply(Eigen::Index j, const Eigen::Ref<const Eigen::VectorXd>& v,
                       Eigen::Ref<Eigen::VectorXd> out) const {
  // Gram matrices are symmetric; K^T v walks columns contiguously.
  if (precision_ == GramPrecision::kDouble) {
    out.noalias() = grams_[static_cast<std::size_t>(j)].transpose() * v;
  } else {
    const Eigen::VectorXf vf = v.cast<float>();
    out = (grams_f_[static_cast<std::size_t>(j)].transpose() * vf).cast<double>();
  }
}

Eigen::VectorXd KernelBank::apply(Eigen::Index j,
                                  const Eigen::Ref<const Eigen::VectorXd>& v) const {
  Eigen::VectorXd out(n_);
  apply(j, v, out);
  return out;
}

double KernelBank::norm_sq(Eigen::Index j, const Eigen::Ref<const Eigen::VectorXd>& c) const {
  return std::max(0.0, c.dot(apply(j, c)));
}

void KernelBank::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(kCacheMagic, sizeof kCacheMagic);
  write_pod(out, kCacheVersion);
  write_pod(out, static_cast<std::uint64_t>(n_));
  write_pod(out, static_cast<std::uint64_t>(specs_.size()));
  write_pod(out, static_cast<std::uint32_t>(precision_ == GramPrecision::kDouble ? 8 : 4));
  for (const auto& s : specs_) {
    write_pod(out, s.width);
    write_pod(out, static_cast<std::int64_t>(s.feature ? *s.feature : -1));
    write_pod(out, static_cast<std::uint32_t>(s.mode));
  }
  for (std::size_t j = 0; j < specs_.size(); ++j) {
    if (precision_ == GramPrecision::kDouble) {
      out.write(reinterpret_cast<const char*>(grams_[j].data()),
                static_cast<std::streamsize>(sizeof(double) * grams_[j].size()));
    } else {
      out.write(reinterpret_cast<const char*>(grams_f_[j].data()),
                static_cast<std::streamsize>(sizeof(float) * grams_f_[j].size()));
    }
  }
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

KernelBank KernelBank::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  char magic[sizeof kCacheMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCacheMagic, sizeof magic) != 0) {
    throw DataError("'" + path.string() + "' is not a Gram cache file");
  }
  if (read_pod<std::uint32_t>(in) != kCacheVersion) {
    throw DataError("unsupported Gram cache version in '" + path.string() + "'");
  }
  KernelBank bank;
  bank.n_ = static_cast<Eigen::Index>(read_pod<std::uint64_t>(in));
  const auto m = read_pod<std::uint64_t>(in);
  const auto bytes = read_pod<std::uint32_t>(in);
  if (bytes != 4 && bytes != 8) throw DataError("bad precision field in Gram cache");
  bank.precision_ = bytes == 8 ? GramPrecision::kDouble : GramPrecision::kFloat;
  for (std::uint64_t j = 0; j < m; ++j) {
    KernelSpec s;
    s.width = read_pod<double>(in);
    const auto feature = read_pod<std::int64_t>(in);
    if (feature >= 0) s.feature = static_cast<Eigen::Index>(feature);
    s.mode = static_cast<KernelMode>(read_pod<std::uint32_t>(in));
    bank.specs_.push_back(s);
  }
  for (std::uint64_t j = 0; j < m; ++j) {
    if (bank.precision_ == GramPrecision::kDouble) {
      Eigen::MatrixXd K(bank.n_, bank.n_);
      in.read(reinterpret_cast<char*>(K.data()),
              static_cast<std::streamsize>(sizeof(double) * K.size()));
      bank.grams_.push_back(std::move(K));
    } else {
      Eigen::MatrixXf K(bank.n_, bank.n_);
      in.read(reinterpret_cast<char*>(K.data()),
              static_cast<std::streamsize>(sizeof(float) * K.size()));
      bank.grams_f_.push_back(std::move(K));
    }
    if (!in) throw DataError("truncated Gram cache file '" + path.string() + "'");
  }
  return bank;
}

}  // namespace nmkl
