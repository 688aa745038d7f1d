#include <gtest/gtest.h>

#include <filesystem>
#include <numbers>

#include "capbridge/config.hpp"
#include "capbridge/system.hpp"

using namespace capbridge;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / "capbridge_solver" / name;
  fs::remove_all(dir);
  return dir;
}

ProblemConfig plates_config() {
  auto c = parse_config_text(R"([problem]
volume = 0.7

[obstacle]
kind = plane
offset = 0.1
normal = 0 0 -1
contact_angle = 70

[obstacle]
kind = plane
offset = 0.1
normal = 0 0 1
contact_angle = 70

[geometry]
radius = 1
z_min = -0.1
z_max = 0.1
edge_length = 0.125

[solver]
smooth_steps = 5
centroid = x1 x2
)");
  return c;
}

}  // namespace

TEST(Solver, PlatesWithCentroidConverge) {
  const auto c = plates_config();
  const auto r = run({make_initial_mesh(c), {}, {}, 0}, make_problem(c), c.solver);
  ASSERT_FALSE(r.failed) << r.message;
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.final_residual, 1e-8);
  EXPECT_NEAR(enclosed_volume(r.state.mesh), 0.7, 1e-9);
  EXPECT_NEAR(volume_centroid_component(r.state.mesh, 0), 0.0, 1e-9);
}

TEST(Solver, SmoothingReducesConstraintErrors) {
  auto c = parse_config_text(preset_text("orr"));
  const auto problem = make_problem(c);
  SolverState st{make_initial_mesh(c), {}, {}, 0};
  record_history(st, problem, "initial");
  for (int k = 0; k < 5; ++k) {
    sobolev_step(st, problem, c.solver);
    record_history(st, problem, "sobolev");
  }
  const double floor = 1e-6;
  for (std::size_t k = 1; k < st.history.size(); ++k) {
    const auto& a = st.history[k - 1];
    const auto& b = st.history[k];
    if (a.volume_err > floor) {
      EXPECT_LT(b.volume_err, a.volume_err) << "step " << k;
    }
    if (a.dist_err > floor) {
      EXPECT_LT(b.dist_err, a.dist_err) << "step " << k;
    }
    EXPECT_LE(b.dist_err, std::max(a.dist_err, floor));
  }
  EXPECT_LE(st.history.back().dist_err, floor);
}

TEST(Solver, RunCaseWritesOutputs) {
  auto c = plates_config();
  c.output_dir = scratch("plates");
  const auto res = run_case(c);
  EXPECT_EQ(res.exit_code, 0);
  for (const char* f : {"initial.vtk", "initial.obj", "final.vtk", "final.obj", "history.txt", "report.txt"}) {
    EXPECT_TRUE(fs::exists(c.output_dir / f)) << f;
  }
  EXPECT_EQ(res.report.gravity_energy, 0.0);
  EXPECT_EQ(res.report.status, "converged");
  EXPECT_EQ(res.report.obstacles.size(), 2u);
}

TEST(Solver, Deterministic) {
  const auto c = plates_config();
  const auto a = run({make_initial_mesh(c), {}, {}, 0}, make_problem(c), c.solver);
  const auto b = run({make_initial_mesh(c), {}, {}, 0}, make_problem(c), c.solver);
  ASSERT_EQ(a.state.history.size(), b.state.history.size());
  for (std::size_t k = 0; k < a.state.history.size(); ++k) {
    EXPECT_EQ(a.state.history[k].residual_l2, b.state.history[k].residual_l2);
    EXPECT_EQ(a.state.history[k].energy, b.state.history[k].energy);
  }
  EXPECT_EQ(a.state.mesh.vertices(), b.state.mesh.vertices());
}

TEST(Solver, RejectsBadSettings) {
  SolverConfig s;
  s.max_iters = -1;
  EXPECT_THROW(s.validate(), ParameterError);
  s = {};
  s.smooth_step_limit_fraction = 0.0;
  EXPECT_THROW(s.validate(), ParameterError);
}

TEST(Solver, OrrForceMatchesClosedForm) {
  auto c = parse_config_text(preset_text("orr"));
  c.output_dir = scratch("orr");
  const auto res = run_case(c);
  ASSERT_EQ(res.exit_code, 0) << res.run.message;
  const auto& mesh = res.run.state.mesh;

  // Filling angle from the triple line on the sphere.
  double sin_psi = 0.0;
  const auto& line = mesh.triple_line_vertices(0);
  for (int v : line) sin_psi += mesh.vertex(v).head<2>().norm();
  sin_psi /= static_cast<double>(line.size());
  const double psi = std::asin(sin_psi);
  const double formula = orr_reference_force(1.0, 1.0, psi, 40.0 * std::numbers::pi / 180.0, -1.32175);
  EXPECT_NEAR(formula, 7.4088, 0.005 * 7.4088);

  const Vec3 F = res.report.obstacles[0].forces.total;
  EXPECT_LE(std::abs(F.x()), 1e-2 * F.norm());
  EXPECT_LE(std::abs(F.y()), 1e-2 * F.norm());
  EXPECT_NEAR(F.norm(), 7.4088, 0.005 * 7.4088);
}
