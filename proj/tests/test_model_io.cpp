#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <json.hpp>
#include <limits>
#include <random>
#include <sstream>

#include "abmal/errors.hpp"
#include "abmal/model_io.hpp"

using namespace abmal;

namespace {

ModelParams random_model(std::mt19937_64& rng, std::size_t d, bool platt) {
  std::normal_distribution<double> g(0.0, 1.0);
  ModelParams m;
  m.kind = platt ? ModelKind::Ssvm : ModelKind::Abm;
  m.theta.resize(static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < m.theta.size(); ++k) m.theta(k) = g(rng) * std::pow(10.0, g(rng) * 5);
  m.reg_lambda = std::abs(g(rng)) * 1e-4;
  m.trained_rounds = 17;
  if (platt) m.platt = PlattParams{-std::abs(g(rng)) / 3.0, g(rng) / 7.0};
  return m;
}

ModelParams round_trip(const ModelParams& m) {
  std::stringstream s;
  write_model(m, s);
  return read_model(s);
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

ModelParams read_text(const std::string& text) {
  std::istringstream in(text);
  return read_model(in);
}

}  // namespace

TEST(ModelIo, RoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const ModelParams m = random_model(rng, 1 + static_cast<std::size_t>(t % 9), t % 2 == 1);
    const ModelParams r = round_trip(m);
    EXPECT_EQ(r.kind, m.kind);
    EXPECT_EQ(r.trained_rounds, m.trained_rounds);
    ASSERT_EQ(r.theta.size(), m.theta.size());
    for (Eigen::Index k = 0; k < m.theta.size(); ++k) EXPECT_TRUE(same_bits(r.theta(k), m.theta(k)));
    EXPECT_TRUE(same_bits(r.reg_lambda, m.reg_lambda));
    ASSERT_EQ(r.platt.has_value(), m.platt.has_value());
    if (m.platt) {
      EXPECT_TRUE(same_bits(r.platt->a, m.platt->a));
      EXPECT_TRUE(same_bits(r.platt->b, m.platt->b));
    }
  }
}

TEST(ModelIo, RealsUseSeventeenDigits) {
  ModelParams m;
  m.theta = Eigen::Vector2d(0.1, 1.0);
  std::stringstream s;
  write_model(m, s);
  EXPECT_NE(s.str().find("0.10000000000000001"), std::string::npos);
  const auto doc = nlohmann::json::parse(s.str());
  EXPECT_EQ(doc["format_version"], kModelFormatVersion);
  EXPECT_EQ(doc["model_kind"], "abm");
  EXPECT_EQ(doc["d"], 2);
  EXPECT_FALSE(doc.contains("platt"));
}

TEST(ModelIo, SaveAndLoadFile) {
  std::mt19937_64 rng(2);
  const ModelParams m = random_model(rng, 6, true);
  const auto path = std::filesystem::temp_directory_path() / "abmal_test_model.json";
  save_model(m, path);
  const ModelParams r = load_model(path);
  EXPECT_EQ(r.theta, m.theta);
  EXPECT_EQ(r.platt->a, m.platt->a);
  std::filesystem::remove(path);
}

TEST(ModelIo, SchemaErrors) {
  EXPECT_THROW(read_text("{not json"), SchemaError);
  EXPECT_THROW(read_text(R"({"format_version": 2, "model_kind": "abm", "d": 1, "theta": [1], "reg_lambda": 0, "trained_rounds": 0})"), SchemaError);
  EXPECT_THROW(read_text(R"({"format_version": 1, "model_kind": "abm", "d": 2, "theta": [1], "reg_lambda": 0, "trained_rounds": 0})"), SchemaError);
  EXPECT_THROW(read_text(R"({"format_version": 1, "model_kind": "crf", "d": 1, "theta": [1], "reg_lambda": 0, "trained_rounds": 0})"), SchemaError);
  EXPECT_THROW(read_text(R"({"format_version": 1, "model_kind": "abm", "d": 1, "theta": ["x"], "reg_lambda": 0, "trained_rounds": 0})"), SchemaError);
  EXPECT_THROW(read_text(R"({"format_version": 1, "model_kind": "abm", "d": 1, "reg_lambda": 0, "trained_rounds": 0})"), SchemaError);
  EXPECT_NO_THROW(read_text(R"({"format_version": 1, "model_kind": "ssvm", "d": 1, "theta": [1], "reg_lambda": 0, "trained_rounds": 0})"));
}

TEST(ModelIo, MissingFileThrows) {
  EXPECT_THROW(load_model("/nonexistent/abmal/model.json"), std::runtime_error);
}
