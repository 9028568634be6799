#include <sstream>

#include <gtest/gtest.h>

#include "nmkl/error.hpp"
#include "nmkl/model_io.hpp"

namespace nmkl {
namespace {

Model trained_model(Variant v) {
  const Dataset d = minmax_scale(make_two_gaussians(30, 3, 2.0, 2, 12));
  const KernelBank bank(build_bank(3), d.features);
  TrainConfig c;
  c.variant = v;
  c.max_iters = 200;
  return train(d, bank, c, {0.1, 0.9}).model;
}

TEST(ModelIo, RoundTripPredictsBitwise) {
  for (Variant v : {Variant::kStPMKL, Variant::kSiPMKL, Variant::kMiPMKL}) {
    Model m = trained_model(v);
    m.scaler = MinMaxScaler{Eigen::Vector3d(0.1, -2, 3), Eigen::Vector3d(1.0 / 3, 0, 7)};
    std::stringstream buf;
    save_model(m, buf);
    const Model back = load_model(buf);
    EXPECT_EQ(back.variant, m.variant);
    EXPECT_EQ(back.specs, m.specs);
    EXPECT_EQ(back.lambda, m.lambda);
    EXPECT_EQ(back.rho, m.rho);
    EXPECT_EQ(back.rho_fraction, m.rho_fraction);
    EXPECT_EQ(back.iterations, m.iterations);
    EXPECT_EQ(back.final_gap, m.final_gap);
    EXPECT_EQ(back.status, m.status);
    EXPECT_TRUE((back.coef.array() == m.coef.array()).all());
    EXPECT_TRUE((back.train_features.array() == m.train_features.array()).all());
    ASSERT_TRUE(back.scaler.has_value());
    EXPECT_TRUE((back.scaler->range.array() == m.scaler->range.array()).all());

    const Eigen::MatrixXd query = Eigen::MatrixXd::Random(7, 3);
    const Prediction a = predict(m, query);
    const Prediction b = predict(back, query);
    EXPECT_TRUE((a.scores.array() == b.scores.array()).all());
  }
}

TEST(ModelIo, SparseCoefficientsAndNoScaler) {
  Model m = trained_model(Variant::kStPMKL);
  m.coef.col(0).setZero();
  m.scaler.reset();
  std::stringstream buf;
  save_model(m, buf);
  const Model back = load_model(buf);
  EXPECT_FALSE(back.scaler.has_value());
  EXPECT_TRUE(back.coef.col(0).isZero(0.0));
  EXPECT_TRUE((back.coef.array() == m.coef.array()).all());
}

TEST(ModelIo, RejectsForeignOrBrokenFiles) {
  std::stringstream not_json("hello");
  EXPECT_THROW(load_model(not_json), DataError);
  std::stringstream wrong_tag(R"({"format": "other", "version": 1})");
  EXPECT_THROW(load_model(wrong_tag), DataError);
  std::stringstream wrong_version(R"({"format": "nmkl-model", "version": 99})");
  EXPECT_THROW(load_model(wrong_version), DataError);
  EXPECT_THROW(load_model(std::filesystem::path("/nonexistent/model.json")), DataError);
}

}  // namespace
}  // namespace nmkl
