#include "nmkl/model_io.hpp"

#include <fstream>

#include "json.hpp"
#include "nmkl/error.hpp"

namespace nmkl {
namespace {

using nlohmann::json;

constexpr const char* kFormatTag = "nmkl-model";
constexpr int kFormatVersion = 1;

json vector_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

SolveStatus parse_status(const std::string& s) {
  if (s == "gap_converged") return SolveStatus::kGapConverged;
  if (s == "iteration_cap") return SolveStatus::kIterationCap;
  throw DataError("model file: unknown solve status '" + s + "'");
}

}  // namespace

void save_model(const Model& model, std::ostream& out) {
  json doc;
  doc["format"] = kFormatTag;
  doc["version"] = kFormatVersion;
  doc["variant"] = to_string(model.variant);
  doc["lambda"] = model.lambda;
  doc["rho"] = model.rho;
  doc["rho_fraction"] = model.rho_fraction;
  doc["iterations"] = model.iterations;
  doc["final_gap"] = model.final_gap;
  doc["status"] = to_string(model.status);

  json kernels = json::array();
  for (const auto& s : model.specs) {
    json k;
    k["width"] = s.width;
    k["scope"] = s.feature ? json(*s.feature + 1) : json("all");
    k["mode"] = to_string(s.mode);
    kernels.push_back(k);
  }
  doc["kernels"] = kernels;

  const Eigen::Index n = model.train_features.rows();
  const Eigen::Index d = model.train_features.cols();
  doc["n"] = n;
  doc["d"] = d;
  json rows = json::array();
  for (Eigen::Index i = 0; i < n; ++i) {
    rows.push_back(vector_to_json(model.train_features.row(i).transpose()));
  }
  doc["train_features"] = rows;

  json coef = json::array();
  for (Eigen::Index j = 0; j < model.coef.cols(); ++j) {
    if (model.coef.col(j).isZero(0.0)) continue;
    coef.push_back({{"kernel", j}, {"values", vector_to_json(model.coef.col(j))}});
  }
  doc["coef"] = coef;

  if (model.scaler) {
    doc["scaler"] = {{"min", vector_to_json(model.scaler->min)},
                     {"range", vector_to_json(model.scaler->range)}};
  }
  out << doc.dump(1) << '\n';
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  save_model(model, out);
}

Model load_model(std::istream& in) {
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format") != kFormatTag) throw DataError("not an nmkl model file");
    if (doc.at("version").get<int>() != kFormatVersion) {
      throw DataError("unsupported model format version");
    }
    Model model;
    model.variant = parse_variant(doc.at("variant").get<std::string>());
    model.lambda = doc.at("lambda").get<double>();
    model.rho = doc.at("rho").get<double>();
    model.rho_fraction = doc.at("rho_fraction").get<double>();
    model.iterations = doc.at("iterations").get<int>();
    model.final_gap = doc.at("final_gap").get<double>();
    model.status = parse_status(doc.at("status").get<std::string>());

    for (const auto& k : doc.at("kernels")) {
      KernelSpec s;
      s.width = k.at("width").get<double>();
      const auto& scope = k.at("scope");
      if (!scope.is_string()) s.feature = scope.get<Eigen::Index>() - 1;
      s.mode = parse_kernel_mode(k.at("mode").get<std::string>());
      model.specs.push_back(s);
    }

    const auto n = doc.at("n").get<Eigen::Index>();
    const auto d = doc.at("d").get<Eigen::Index>();
    const auto& rows = doc.at("train_features");
    if (static_cast<Eigen::Index>(rows.size()) != n) throw DataError("model file: row count mismatch");
    model.train_features.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd row = vector_from_json(rows[static_cast<std::size_t>(i)]);
      if (row.size() != d) throw DataError("model file: row width mismatch");
      model.train_features.row(i) = row.transpose();
    }

    const auto m = static_cast<Eigen::Index>(model.specs.size());
    model.coef = Eigen::MatrixXd::Zero(n, m);
    for (const auto& c : doc.at("coef")) {
      const auto j = c.at("kernel").get<Eigen::Index>();
      const Eigen::VectorXd values = vector_from_json(c.at("values"));
      if (j < 0 || j >= m || values.size() != n) throw DataError("model file: bad coefficient block");
      model.coef.col(j) = values;
    }

    if (doc.contains("scaler")) {
      MinMaxScaler scaler;
      scaler.min = vector_from_json(doc["scaler"].at("min"));
      scaler.range = vector_from_json(doc["scaler"].at("range"));
      if (scaler.min.size() != d || scaler.range.size() != d) {
        throw DataError("model file: scaler width mismatch");
      }
      model.scaler = scaler;
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return load_model(in);
}

}  // namespace nmkl
