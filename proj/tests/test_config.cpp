#include <gtest/gtest.h>

#include "seisop/config.hpp"
#include "seisop/error.hpp"

using namespace seisop;

namespace {

std::string error_of(const std::string& json) {
  try {
    parse_config(json);
  } catch (const InvalidArgument& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, DefaultsAndPresets) {
  const auto p = parse_config("{}");
  EXPECT_EQ(config_to_json(p), config_to_json(ExperimentConfig::full()));
  EXPECT_EQ(p.excitation.grid.size(), 3001u);
  EXPECT_EQ(p.network.width, 64u);
  EXPECT_EQ(p.splits.total(), 700u);
  const auto d = parse_config(R"({"preset": "desk"})");
  EXPECT_EQ(d.excitation.grid.size(), 1501u);
  EXPECT_EQ(d.excitation.grid.dt(), 0.02);
  EXPECT_EQ(d.network.width, 32u);
  EXPECT_EQ(d.network.layers, 4u);
  EXPECT_EQ(d.network.modes, 16u);
  EXPECT_EQ(d.training.epochs, 150u);
  EXPECT_EQ(d.splits.train, 100u);
  EXPECT_EQ(d.splits.validation, 25u);
  EXPECT_EQ(d.splits.test, 50u);
}

TEST(Config, RoundTripThroughJson) {
  auto c = ExperimentConfig::desk();
  c.simplifier = simplify::SimplifierKind::relaxed(30);
  c.seed = 99;
  c.model.stiffnesses = {5e7, 4e7, 3e7, 2e7, 1e7};
  const auto back = parse_config(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  EXPECT_EQ(physics_hash(back), physics_hash(c));
  c.training.epochs = 3;
  EXPECT_EQ(physics_hash(back), physics_hash(c));
  c.model.damping_ratio = 0.02;
  EXPECT_NE(physics_hash(back), physics_hash(c));
}

TEST(Config, OverridesAndScalarStiffness) {
  const auto c = parse_config(R"({"model": {"stiffnesses": 3e7}, "simplifier": {"kind": "modal", "r": 2},
                                  "seed": 5, "training": {"epochs": 10}})");
  EXPECT_EQ(c.model.stiffnesses, std::vector<double>(5, 3e7));
  EXPECT_EQ(c.simplifier, simplify::SimplifierKind::modal(2));
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.training.epochs, 10u);
}

TEST(Config, ErrorsNameThePath) {
  EXPECT_NE(error_of(R"({"excitation": {"d_omega": 0}})").find("config.excitation.d_omega"), std::string::npos);
  EXPECT_NE(error_of(R"({"excitation": {"d_omega": -1}})").find("config.excitation.d_omega"), std::string::npos);
  EXPECT_NE(error_of(R"({"network": {"widht": 3}})").find("config.network.widht: unknown key"), std::string::npos);
  EXPECT_NE(error_of(R"({"training": {"batch": "big"}})").find("config.training.batch"), std::string::npos);
  EXPECT_NE(error_of(R"({"model": {"stiffnesses": [1, 2]}})").find("config.model.stiffnesses"), std::string::npos);
  EXPECT_NE(error_of(R"({"simplifier": {"kind": "modal", "r": 9}})").find("simplifier.r"), std::string::npos);
  EXPECT_NE(error_of(R"({"preset": "huge"})").find("config.preset"), std::string::npos);
  EXPECT_FALSE(error_of("[1, 2").empty());
}

TEST(Config, LearningRateSchedule) {
  TrainingConfig t;
  EXPECT_DOUBLE_EQ(t.rate_at(0), 1e-3);
  EXPECT_DOUBLE_EQ(t.rate_at(99), 1e-3);
  EXPECT_DOUBLE_EQ(t.rate_at(100), 5e-4);
  EXPECT_DOUBLE_EQ(t.rate_at(250), 2.5e-4);
}
