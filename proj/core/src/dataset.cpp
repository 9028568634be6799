#include "nmkl/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string_view>

#include "nmkl/error.hpp"
#include "nmkl/random.hpp"

namespace nmkl {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

double parse_label(std::string_view field, const std::filesystem::path& path,
                   std::size_t line) {
  const auto value = parse_double(field);
  if (!value) {
    throw DataError(where(path, line) + "non-numeric label '" + std::string(field) + "'");
  }
  if (*value == 1.0) return 1.0;
  if (*value == -1.0 || *value == 0.0) return -1.0;
  throw DataError(where(path, line) + "label '" + std::string(trim(field)) +
                  "' is not one of -1, +1, 0, 1");
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

Dataset assemble(std::vector<std::vector<double>>& rows, std::vector<double>& labels,
                 Eigen::Index dim, const std::filesystem::path& path) {
  if (rows.empty()) throw DataError(path.string() + ": no data rows");
  Dataset data;
  data.name = path.stem().string();
  data.features.resize(static_cast<Eigen::Index>(rows.size()), dim);
  data.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    data.labels(r) = labels[i];
    for (Eigen::Index c = 0; c < dim; ++c) {
      data.features(r, c) = c < static_cast<Eigen::Index>(rows[i].size()) ? rows[i][c] : 0.0;
    }
  }
  validate(data);
  return data;
}

Dataset load_csv(const std::filesystem::path& path, std::ifstream& in) {
  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto fields = split_fields(text, ',');
    if (first_content) {
      first_content = false;
      if (!parse_double(fields.front())) continue;  // header row
    }
    if (fields.size() < 2) {
      throw DataError(where(path, line_no) + "expected a label and at least one feature");
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw DataError(where(path, line_no) + "expected " + std::to_string(width) +
                      " fields, found " + std::to_string(fields.size()));
    }
    labels.push_back(parse_label(fields[0], path, line_no));
    std::vector<double> row;
    row.reserve(fields.size() - 1);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      const auto v = parse_double(fields[k]);
      if (!v) {
        throw DataError(where(path, line_no) + "non-numeric feature '" +
                        std::string(trim(fields[k])) + "'");
      }
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  return assemble(rows, labels, static_cast<Eigen::Index>(width == 0 ? 0 : width - 1), path);
}

Dataset load_svmlight(const std::filesystem::path& path, std::ifstream& in,
                      std::optional<Eigen::Index> dim) {
  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  std::string line;
  std::size_t line_no = 0;
  Eigen::Index max_index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text(line);
    if (const auto hash = text.find('#'); hash != std::string_view::npos) {
      text = text.substr(0, hash);
    }
    const auto tokens = split_whitespace(text);
    if (tokens.empty()) continue;
    labels.push_back(parse_label(tokens[0], path, line_no));
    std::vector<double> row;
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      const auto colon = tokens[k].find(':');
      if (colon == std::string_view::npos) {
        throw DataError(where(path, line_no) + "malformed pair '" + std::string(tokens[k]) + "'");
      }
      long long index = 0;
      const auto key = tokens[k].substr(0, colon);
      const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), index);
      if (ec != std::errc() || ptr != key.data() + key.size() || index < 1) {
        throw DataError(where(path, line_no) + "bad feature index '" + std::string(key) + "'");
      }
      const auto value = parse_double(tokens[k].substr(colon + 1));
      if (!value) {
        throw DataError(where(path, line_no) + "non-numeric feature '" +
                        std::string(tokens[k].substr(colon + 1)) + "'");
      }
      if (dim && index > *dim) {
        throw DataError(where(path, line_no) + "feature index " + std::to_string(index) +
                        " exceeds dimension " + std::to_string(*dim));
      }
      if (static_cast<std::size_t>(index) > row.size()) row.resize(index, 0.0);
      row[index - 1] = *value;
      max_index = std::max<Eigen::Index>(max_index, index);
    }
    rows.push_back(std::move(row));
  }
  return assemble(rows, labels, dim.value_or(max_index), path);
}

Eigen::Index round_half_up(double x) {
  // The epsilon keeps products such as 0.2 * 5 from landing just below an integer.
  return static_cast<Eigen::Index>(std::floor(x + 0.5 + 1e-9));
}

}  // namespace

void validate(const Dataset& data) {
  if (data.features.rows() != data.labels.size()) {
    throw DataError("dataset '" + data.name + "': feature rows and label count differ");
  }
  if (data.size() < 2) throw DataError("dataset '" + data.name + "': need at least 2 rows");
  if (data.dim() < 1) throw DataError("dataset '" + data.name + "': need at least 1 feature");
  if (!data.features.allFinite()) {
    throw DataError("dataset '" + data.name + "': non-finite feature value");
  }
  for (Eigen::Index i = 0; i < data.labels.size(); ++i) {
    if (data.labels(i) != 1.0 && data.labels(i) != -1.0) {
      throw DataError("dataset '" + data.name + "': label at row " + std::to_string(i) +
                      " is not +-1");
    }
  }
}

FileFormat parse_file_format(const std::string& name) {
  if (name == "csv") return FileFormat::kCsv;
  if (name == "svmlight" || name == "libsvm") return FileFormat::kSvmlight;
  throw ArgumentError("unknown file format '" + name + "' (expected csv or svmlight)");
}

Dataset load_dataset(const std::filesystem::path& path, FileFormat format,
                     std::optional<Eigen::Index> dim) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return format == FileFormat::kCsv ? load_csv(path, in) : load_svmlight(path, in, dim);
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  char buf[64];
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    out << (data.labels(i) > 0 ? "1" : "-1");
    for (Eigen::Index c = 0; c < data.dim(); ++c) {
      const auto res = std::to_chars(buf, buf + sizeof buf, data.features(i, c));
      out << ',' << std::string_view(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

MinMaxScaler MinMaxScaler::fit(const Eigen::MatrixXd& features) {
  MinMaxScaler s;
  s.min = features.colwise().minCoeff().transpose();
  s.range = features.colwise().maxCoeff().transpose() - s.min;
  return s;
}

Eigen::MatrixXd MinMaxScaler::apply(const Eigen::MatrixXd& features) const {
  if (features.cols() != min.size()) {
    throw ArgumentError("scaler expects " + std::to_string(min.size()) + " columns, got " +
                        std::to_string(features.cols()));
  }
  Eigen::MatrixXd out(features.rows(), features.cols());
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    if (range(c) > 0.0) {
      out.col(c) = (features.col(c).array() - min(c)) / range(c);
    } else {
      out.col(c).setZero();
    }
  }
  return out;
}

Dataset minmax_scale(const Dataset& data) {
  Dataset out = data;
  out.features = MinMaxScaler::fit(data.features).apply(data.features);
  return out;
}

FlipResult flip_labels(const Dataset& data, const NoiseSpec& spec) {
  if (!(spec.q >= 0.0 && spec.q < 0.5)) {
    throw DataError("noise level q must lie in [0, 0.5), got " + std::to_string(spec.q));
  }
  FlipResult result{data, std::vector<bool>(static_cast<std::size_t>(data.size()), false)};
  Rng rng(spec.seed);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    // One draw per example even when q == 0 keeps the stream aligned across q.
    if (rng.bernoulli(spec.q)) {
      result.flip_mask[static_cast<std::size_t>(i)] = true;
      result.data.labels(i) = -data.labels(i);
    }
  }
  return result;
}

SplitResult split(Eigen::Index n, double train_frac, double validation_frac,
                  std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0) ||
      !(validation_frac >= 0.0 && validation_frac < 1.0)) {
    throw DataError("split fractions out of range");
  }
  const Eigen::Index n_test = round_half_up((1.0 - train_frac) * static_cast<double>(n));
  const Eigen::Index n_pool = n - n_test;
  Eigen::Index n_val = round_half_up(validation_frac * static_cast<double>(n_pool));
  if (validation_frac > 0.0 && n_val == 0) n_val = 1;
  const Eigen::Index n_train = n_pool - n_val;
  if (n_test < 1 || n_train < 1) {
    throw DataError("dataset of " + std::to_string(n) + " rows is too small to split");
  }

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Rng rng(seed);
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.below(i)]);
  }

  SplitResult out;
  const auto test_end = perm.begin() + n_test;
  const auto val_end = test_end + n_val;
  out.test.assign(perm.begin(), test_end);
  out.validation.assign(test_end, val_end);
  out.train.assign(val_end, perm.end());
  std::sort(out.test.begin(), out.test.end());
  std::sort(out.validation.begin(), out.validation.end());
  std::sort(out.train.begin(), out.train.end());
  return out;
}

Dataset subset(const Dataset& data, const std::vector<Eigen::Index>& indices) {
  Dataset out;
  out.name = data.name;
  out.features.resize(static_cast<Eigen::Index>(indices.size()), data.dim());
  out.labels.resize(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    out.features.row(r) = data.features.row(indices[k]);
    out.labels(r) = data.labels(indices[k]);
  }
  return out;
}

Dataset make_two_gaussians(Eigen::Index n, Eigen::Index d, double separation,
                           Eigen::Index informative, std::uint64_t seed) {
  if (n < 2 || d < 1) throw ArgumentError("make_two_gaussians: need n >= 2 and d >= 1");
  informative = std::clamp<Eigen::Index>(informative, 1, d);
  Dataset data;
  data.name = "two_gaussians";
  data.features.resize(n, d);
  data.labels.resize(n);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = (i % 2 == 0) ? 1.0 : -1.0;
    data.labels(i) = y;
    for (Eigen::Index c = 0; c < d; ++c) {
      const double shift = c < informative ? 0.5 * separation * y : 0.0;
      data.features(i, c) = shift + rng.normal();
    }
  }
  return data;
}

}  // namespace nmkl
