#include <gtest/gtest.h>

#include <numbers>
#include <regex>

#include "capbridge/config.hpp"

using namespace capbridge;

namespace {

const char* kMinimal = R"([problem]
volume = 0.2

[obstacle]
kind = plane
contact_angle = 60

[output]
directory = here
)";

std::string with(const std::string& from, const std::string& to) {
  return std::regex_replace(std::string(kMinimal), std::regex(from), to);
}

void expect_config_error(const std::string& text, const std::string& field) {
  try {
    parse_config_text(text);
    FAIL() << "expected ConfigError for " << field;
  } catch (const ConfigError& e) {
    EXPECT_NE(e.field().find(field), std::string::npos) << e.field() << ": " << e.what();
  }
}

}  // namespace

TEST(Config, OrrPreset) {
  const auto c = parse_config_text(preset_text("orr"));
  ASSERT_EQ(c.obstacles.size(), 2u);
  EXPECT_EQ(c.obstacles[0].kind, ObstacleSpec::Kind::sphere);
  EXPECT_EQ(c.obstacles[0].center, Vec3(0, 0, 1));
  EXPECT_EQ(c.obstacles[1].kind, ObstacleSpec::Kind::plane);
  EXPECT_EQ(c.obstacles[1].contact_angle, 40.0);
  EXPECT_EQ(c.target_volume, 0.165);
  EXPECT_EQ(c.bond, 0.0);
  EXPECT_EQ(c.geometry.kind, GeometrySpec::Kind::cylinder);
  EXPECT_EQ(c.solver.remesh.target_cells, 13728u);
  EXPECT_EQ(c.solver.n_smooth_steps, 5);

  const auto p = make_problem(c);
  EXPECT_NEAR(p.params.beta[0], std::cos(40.0 * std::numbers::pi / 180.0), 1e-15);
  const auto m = make_initial_mesh(c);
  EXPECT_EQ(m.num_obstacle_regions(), 2u);
}

TEST(Config, PresetsParse) {
  for (const auto& name : preset_names()) {
    if (name == "unduloid") continue;  // needs an external mesh
    EXPECT_NO_THROW(parse_config_text(preset_text(name))) << name;
  }
  EXPECT_THROW(preset_text("nope"), ParameterError);
}

TEST(Config, BondPresetGravity) {
  const auto c = parse_config_text(preset_text("bond_4"));
  EXPECT_EQ(c.bond, 4.0);
  EXPECT_EQ(c.gravity, Vec3(0, -1, 0));
}

TEST(Config, MinimalDefaults) {
  const auto c = parse_config_text(kMinimal);
  EXPECT_EQ(c.output_dir, "./here");
  EXPECT_EQ(c.obstacles[0].normal, Vec3::UnitZ());
  EXPECT_EQ(c.geometry.edge_length, 0.0625);
  EXPECT_EQ(c.solver.newton_tol, 1e-8);
  EXPECT_FALSE(c.solver.remesh.enabled());
}

TEST(Config, CentroidAxes) {
  const auto c = parse_config_text(std::string(kMinimal) + "[solver]\ncentroid = x1 x3\n");
  EXPECT_EQ(c.solver.centroid_axes, (std::vector<int>{0, 2}));
  expect_config_error(std::string(kMinimal) + "[solver]\ncentroid = x4\n", "solver.centroid");
}

TEST(Config, Errors) {
  expect_config_error(with("contact_angle = 60", "contact_angle = 200"), "contact_angle");
  expect_config_error(with("\\[obstacle\\]\nkind = plane\ncontact_angle = 60\n", ""), "obstacle");
  expect_config_error(with("volume = 0.2", "volume = 0.2\nvolum = 1"), "problem.volum");
  expect_config_error(with("volume = 0.2", "volume = 0.2\nvolume = 0.3"), "problem.volume");
  expect_config_error(with("volume = 0.2", "volume = abc"), "problem.volume");
  expect_config_error(with("volume = 0.2", "volume = 0.2 junk"), "problem.volume");
  expect_config_error(with("kind = plane", "kind = torus"), "kind");
  expect_config_error(std::string(kMinimal) + "[bogus]\n", "bogus");
}

TEST(Config, ErrorCarriesLine) {
  try {
    parse_config_text(with("volume = 0.2", "volume = 0.2\nvolume = 0.3"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}
