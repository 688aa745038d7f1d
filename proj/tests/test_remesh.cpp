#include <gtest/gtest.h>

#include <random>

#include "capbridge/errors.hpp"
#include "capbridge/remesh.hpp"
#include "helpers.hpp"

using namespace capbridge;

namespace {

double rel_change(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Projection, SphereAndPlane) {
  const auto s = sphere_field(Vec3(0, 0, 1), 1.0);
  const Vec3 p = project_to_obstacle(Vec3(0.3, 0.4, 2.5), s);
  EXPECT_NEAR((p - Vec3(0, 0, 1)).norm(), 1.0, 1e-12);
  EXPECT_NEAR(((p - Vec3(0, 0, 1)).normalized() - Vec3(0.3, 0.4, 1.5).normalized()).norm(), 0.0, 1e-12);
  const Vec3 q = project_to_obstacle(Vec3(0.2, -1.0, 0.7), plane_field(0.0));
  EXPECT_EQ(q, Vec3(0.2, -1.0, 0.0));
}

TEST(Projection, GridSphere) {
  const auto grid = grid_field(sample_field(sphere_field(Vec3::Zero(), 1.0), Vec3::Constant(-2.05), 0.1, {42, 42, 42}));
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int k = 0; k < 30; ++k) {
    const Vec3 x(u(rng), u(rng), u(rng));
    if (x.norm() < 0.5) continue;
    EXPECT_LE(std::abs(grid.dist(project_to_obstacle(x, grid))), 1e-8);
  }
}

TEST(Remesh, SphereKeepsAreaAndVolume) {
  const auto ico = generate_icosphere(1.0, 4);
  const double L = mesh_quality(ico).mean_edge;
  for (double factor : {0.5, 1.0}) {
    RemeshParams params;
    params.target_edge_length = factor * L;
    const auto out = remesh(ico, params, {});
    EXPECT_TRUE(out.is_closed());
    EXPECT_LE(rel_change(surface_area(out), surface_area(ico)), 1e-3) << factor;
    EXPECT_LE(rel_change(enclosed_volume(out), enclosed_volume(ico)), 1e-3) << factor;
    const auto q = mesh_quality(out);
    EXPECT_GE(q.min_edge, 0.5 * params.target_edge_length);
    EXPECT_LE(q.max_edge, 1.6 * params.target_edge_length);
  }
}

TEST(Remesh, CellTargetSetsEdgeLength) {
  const auto ico = generate_icosphere(1.0, 3);
  const double L = edge_length_for_cell_count(ico, 2000);
  EXPECT_NEAR(L, std::sqrt(4.0 * surface_area(ico) / (std::sqrt(3.0) * 2000)), 1e-12);
  RemeshParams params;
  params.target_cells = 2000;
  const auto out = remesh(ico, params, {});
  EXPECT_NEAR(static_cast<double>(out.num_faces()), 2000.0, 400.0);
}

TEST(Remesh, CylinderBetweenPlatesKeepsContact) {
  const auto cyl = generate_cylinder(1.0, -0.1, 0.1, 0.1);
  const std::vector<ObstacleField> plates = {plane_field(0.1, -Vec3::UnitZ()), plane_field(0.1, Vec3::UnitZ())};
  RemeshParams params;
  params.target_edge_length = 0.06;
  const auto out = remesh(cyl, params, plates);
  ASSERT_TRUE(out.is_closed());
  EXPECT_EQ(out.num_obstacle_regions(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_FALSE(out.triple_line_vertices(i).empty());
    for (int v : out.wetted_vertices(i)) EXPECT_LE(std::abs(plates[i].dist(out.vertex(v))), 1e-6);
    for (int v : out.triple_line_vertices(i)) {
      const Vec3& x = out.vertex(v);
      EXPECT_NEAR(std::hypot(x.x(), x.y()), 1.0, 5e-3);
    }
  }
  // Each triple line is a single closed loop: every vertex has two line edges.
  for (std::size_t i = 0; i < 2; ++i) {
    std::vector<int> degree(out.num_vertices(), 0);
    for (int e : out.triple_line_edges(i)) {
      for (int v : out.edges()[e].vertices) ++degree[v];
    }
    for (int v : out.triple_line_vertices(i)) EXPECT_EQ(degree[v], 2);
  }
  EXPECT_NEAR(surface_area(out, RegionFilter::liquid_solid(0)), surface_area(cyl, RegionFilter::liquid_solid(0)),
              2e-3);
  const auto q = mesh_quality(out);
  EXPECT_GE(q.min_edge, 0.5 * params.target_edge_length);
  EXPECT_LE(q.max_edge, 1.6 * params.target_edge_length);
}

TEST(Remesh, RejectsBadParameters) {
  RemeshParams p;
  p.target_edge_length = -1.0;
  EXPECT_THROW(p.validate(), ParameterError);
  p.target_edge_length = 0.1;
  p.smoothing = 2.0;
  EXPECT_THROW(p.validate(), ParameterError);
}
