#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "capbridge/errors.hpp"
#include "capbridge/mesh.hpp"
#include "helpers.hpp"

using namespace capbridge;
using namespace capbridge::testing;

namespace {

ShellMesh single_triangle(bool flipped = false) {
  std::vector<Vec3> p{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  std::vector<Triangle> t{flipped ? Triangle{0, 2, 1} : Triangle{0, 1, 2}};
  return ShellMesh(p, t);
}

ShellMesh octahedron() {
  std::vector<Vec3> p{Vec3::UnitX(), -Vec3::UnitX(), Vec3::UnitY(),
                      -Vec3::UnitY(), Vec3::UnitZ(), -Vec3::UnitZ()};
  std::vector<Triangle> t;
  for (int x : {0, 1}) {
    for (int y : {2, 3}) {
      for (int z : {4, 5}) {
        Triangle tri{x, y, z};
        const Vec3 n = (p[y] - p[x]).cross(p[z] - p[x]);
        if (n.dot(p[x] + p[y] + p[z]) < 0) std::swap(tri[1], tri[2]);
        t.push_back(tri);
      }
    }
  }
  return ShellMesh(p, t);
}

// Two faces sharing the edge (0,0,0)-(1,0,0): liquid-solid in the plane z = 0,
// liquid-air opened by `opening` radians from it.
ShellMesh wedge(double opening) {
  std::vector<Vec3> p{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, -1, 0),
                      Vec3(0.5, -std::cos(opening), std::sin(opening))};
  return ShellMesh(p, {{0, 1, 2}, {1, 0, 3}}, {liquid_solid(0), kLiquidAir});
}

double max_vertex_normal_error(const ShellMesh& m) {
  double worst = 0.0;
  for (int v = 0; v < static_cast<int>(m.num_vertices()); ++v) {
    worst = std::max(worst, std::acos(std::min(1.0, vertex_normal(m, v).dot(m.vertex(v).normalized()))));
  }
  return worst;
}

}  // namespace

TEST(FaceNormal, CounterClockwiseTriangle) {
  const auto n = face_normal(single_triangle(), 0);
  EXPECT_NEAR((n - Vec3(0, 0, 1)).norm(), 0.0, 1e-15);
}

TEST(FaceNormal, FlippedTriangle) {
  const auto n = face_normal(single_triangle(true), 0);
  EXPECT_NEAR((n - Vec3(0, 0, -1)).norm(), 0.0, 1e-15);
}

TEST(FaceNormal, IcosphereOutward) {
  const auto m = generate_icosphere(1.0, 3);
  for (int f = 0; f < static_cast<int>(m.num_faces()); ++f) {
    const auto& t = m.triangle(f);
    const Vec3 c = (m.vertex(t[0]) + m.vertex(t[1]) + m.vertex(t[2])) / 3.0;
    ASSERT_GT(m.normal(f).dot(c), 0.0) << "face " << f;
  }
}

TEST(VertexNormal, FlatPatch) {
  std::vector<Vec3> p{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(-1, 0, 0), Vec3(0, -1, 0)};
  ShellMesh m(p, {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 1}});
  EXPECT_NEAR((vertex_normal(m, 0) - Vec3::UnitZ()).norm(), 0.0, 1e-15);
}

TEST(VertexNormal, Octahedron) {
  const auto m = octahedron();
  for (int v = 0; v < 6; ++v) {
    EXPECT_NEAR((vertex_normal(m, v) - m.vertex(v)).norm(), 0.0, 1e-15);
  }
}

TEST(VertexNormal, ConvergesOnIcosphere) {
  // k = 1 is symmetric enough to be exact; start past it.
  double prev = 1.0;
  for (int k = 2; k <= 5; ++k) {
    const double err = max_vertex_normal_error(generate_icosphere(1.0, k));
    EXPECT_LT(err, prev) << "subdivisions " << k;
    prev = err;
  }
}

TEST(Conormals, CylinderJunction) {
  const auto m = generate_cylinder(1.0, -0.1, 0.1, 0.0625);
  for (std::size_t k = 0; k < 2; ++k) {
    const double up = k == 0 ? 1.0 : -1.0;
    for (int v : m.triple_line_vertices(k)) {
      const auto mu = conormals_at_triple_vertex(m, v, k);
      Vec3 radial = m.vertex(v);
      radial.z() = 0.0;
      radial.normalize();
      EXPECT_NEAR((mu.liquid_air - up * Vec3::UnitZ()).norm(), 0.0, 1e-12);
      EXPECT_NEAR((mu.liquid_solid - radial).norm(), 0.0, 1e-2);  // averaged over two chords
      EXPECT_NEAR(mu.liquid_solid.z(), 0.0, 1e-14);
    }
  }
}

TEST(Conormals, WedgeOpeningAngle) {
  for (double deg : {30.0, 40.0, 90.0, 135.0}) {
    const double a = deg * std::numbers::pi / 180.0;
    const auto m = wedge(a);
    for (int v : {0, 1}) {
      const auto mu = conormals_at_triple_vertex(m, v, 0);
      EXPECT_NEAR(mu.liquid_air.dot(mu.liquid_solid), std::cos(a), 1e-14) << deg;
    }
  }
}

TEST(Conormals, NonTripleVertexRejected) {
  const auto m = generate_cylinder(1.0, -0.1, 0.1, 0.25);
  EXPECT_THROW(conormals_at_triple_vertex(m, 0, 0), PreconditionError);
}

TEST(SurfaceArea, SingleTriangle) { EXPECT_DOUBLE_EQ(surface_area(single_triangle()), 0.5); }

TEST(SurfaceArea, IcosphereConvergesFromBelow) {
  const double exact = 4.0 * std::numbers::pi;
  double prev = 0.0;
  std::vector<double> err;
  for (int k = 2; k <= 5; ++k) {
    const double a = surface_area(generate_icosphere(1.0, k));
    EXPECT_LT(a, exact);
    EXPECT_GT(a, prev);
    prev = a;
    err.push_back(exact - a);
  }
  for (std::size_t i = 1; i < err.size(); ++i) {
    EXPECT_NEAR(std::log2(err[i - 1] / err[i]), 2.0, 0.1);  // halving h quarters the error
  }
}

TEST(SurfaceArea, RegionFilters) {
  const auto m = generate_cylinder(1.0, -0.1, 0.1, 0.125);
  const double total = surface_area(m);
  const double parts = surface_area(m, RegionFilter::liquid_air()) +
                       surface_area(m, RegionFilter::liquid_solid(0)) +
                       surface_area(m, RegionFilter::liquid_solid(1));
  EXPECT_NEAR(total, parts, 1e-13 * total);
}

TEST(EnclosedVolume, UnitCube) { EXPECT_NEAR(enclosed_volume(unit_cube()), 1.0, 1e-15); }

TEST(EnclosedVolume, TranslationInvariant) {
  const auto m = jittered(generate_icosphere(1.0, 3), 0.02, 5);
  auto p = m.vertices();
  for (auto& x : p) x += Vec3(3.0, -7.0, 11.0);
  const double v0 = enclosed_volume(m);
  EXPECT_NEAR(enclosed_volume(m.with_vertices(p)), v0, 1e-13 * v0 * 30);
}

TEST(EnclosedVolume, MatchesTetrahedra) {
  const auto m = jittered(generate_icosphere(1.3, 3, Vec3(0.2, 0.1, -0.4)), 0.02, 6);
  const double v = enclosed_volume(m);
  EXPECT_NEAR(v, tet_moments(m).volume, 1e-12 * v);
}

TEST(EnclosedVolume, OpenMeshRejected) {
  EXPECT_THROW(enclosed_volume(single_triangle()), PreconditionError);
}

TEST(GravitationalEnergy, UnitCube) {
  EXPECT_NEAR(gravitational_energy(unit_cube(), Vec3(0, 0, -1)), -0.5, 1e-15);
}

TEST(GravitationalEnergy, MatchesTetrahedra) {
  const auto m = jittered(generate_icosphere(1.0, 3, Vec3(0.5, -0.3, 2.0)), 0.02, 7);
  const Vec3 g = Vec3(0.3, -0.5, 0.8).normalized();
  const double value = gravitational_energy(m, g);
  const double tets = g.dot(tet_moments(m).first);
  EXPECT_NEAR(value, tets, 1e-12 * std::abs(tets));
}

TEST(GravitationalEnergy, InvariantUnderTranslationOrthogonalToGravity) {
  const auto m = jittered(generate_icosphere(1.0, 3, Vec3(0.0, 0.0, 1.0)), 0.02, 8);
  auto p = m.vertices();
  for (auto& x : p) x += Vec3(2.5, -1.0, 0.0);
  const double g0 = gravitational_energy(m, Vec3::UnitZ());
  EXPECT_NEAR(gravitational_energy(m.with_vertices(p), Vec3::UnitZ()), g0, 1e-12 * std::abs(g0));
}

TEST(VolumeCentroid, UnitCube) {
  for (int axis = 0; axis < 3; ++axis) {
    EXPECT_NEAR(volume_centroid_component(unit_cube(), axis), 0.5, 1e-15);
  }
}

TEST(VolumeCentroid, ShiftedCube) {
  const auto m = generate_box(Vec3(2, 0, 0), Vec3(3, 1, 1), 3);
  EXPECT_NEAR(volume_centroid_component(m, 0), 2.5, 1e-14);
}

TEST(VolumeCentroid, MatchesTetrahedra) {
  const auto m = jittered(generate_icosphere(0.7, 3, Vec3(-0.4, 1.2, 0.3)), 0.02, 9);
  const auto tets = tet_moments(m);
  for (int axis = 0; axis < 3; ++axis) {
    EXPECT_NEAR(volume_centroid_component(m, axis), tets.first[axis],
                1e-12 * std::abs(tets.first[axis]));
  }
}

TEST(Cylinder, TriangleCountNearReference) {
  const auto m = generate_cylinder(1.0, -0.1, 0.1, 0.0625);
  EXPECT_NEAR(static_cast<double>(m.num_faces()), 3686.0, 0.02 * 3686.0);
  EXPECT_TRUE(m.is_closed());
  EXPECT_EQ(m.num_obstacle_regions(), 2u);
}

TEST(Cylinder, VolumeNearAnalytic) {
  for (double h : {0.125, 0.0625}) {
    const auto m = generate_cylinder(1.0, -0.1, 0.1, h);
    EXPECT_NEAR(enclosed_volume(m), 0.2 * std::numbers::pi, 0.2 * std::numbers::pi * h * h);
  }
}

TEST(Cylinder, CapsArePlanar) {
  const auto m = generate_cylinder(1.0, -0.1, 0.1, 0.0625);
  for (int f = 0; f < static_cast<int>(m.num_faces()); ++f) {
    if (m.region(f) == liquid_solid(0)) {
      EXPECT_LE((m.normal(f) - Vec3::UnitZ()).norm(), 1e-14);
    } else if (m.region(f) == liquid_solid(1)) {
      EXPECT_LE((m.normal(f) + Vec3::UnitZ()).norm(), 1e-14);
    }
  }
}

TEST(ShellMesh, RejectsZeroAreaTriangle) {
  std::vector<Vec3> p{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)};
  EXPECT_THROW(ShellMesh(p, {{0, 1, 2}}), DegenerateGeometryError);
}

TEST(ShellMesh, RejectsNonManifoldEdge) {
  std::vector<Vec3> p{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, -1, 0), Vec3(0, 0, 1)};
  EXPECT_THROW(ShellMesh(p, {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}}), PreconditionError);
}

TEST(ShellMesh, RejectsInconsistentOrientation) {
  std::vector<Vec3> p{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, -1, 0)};
  EXPECT_THROW(ShellMesh(p, {{0, 1, 2}, {0, 1, 3}}), PreconditionError);
}

TEST(ShellMesh, DisplacementCollapsingFaceThrows) {
  const auto m = single_triangle();
  VertexField V{Vec3::Zero(), Vec3::Zero(), Vec3(1, -1, 0)};
  EXPECT_THROW(m.displaced(V, 1.0), DegenerateGeometryError);
}

TEST(EnergyParams, Validation) {
  EnergyParams p;
  p.beta = {0.5};
  p.target_volume = 1.0;
  EXPECT_NO_THROW(p.validate());
  p.bond = -1.0;
  EXPECT_THROW(p.validate(), ParameterError);
  p.bond = 0.0;
  p.gravity_dir = Vec3(0, 0, 2);
  EXPECT_THROW(p.validate(), ParameterError);
  EXPECT_THROW(beta_from_contact_angle(200.0), ParameterError);
  EXPECT_NEAR(beta_from_contact_angle(40.0), std::cos(40.0 * std::numbers::pi / 180.0), 1e-16);
}
