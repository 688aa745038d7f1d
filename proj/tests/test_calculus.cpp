#include <gtest/gtest.h>

#include <random>

#include "capbridge/calculus.hpp"
#include "capbridge/verify.hpp"
#include "helpers.hpp"

using namespace capbridge;
using namespace capbridge::testing;

namespace {

ShellMesh bumpy_sphere() { return jittered(generate_icosphere(1.0, 2, Vec3(0.1, -0.2, 0.3)), 0.03, 21); }

ShellMesh bumpy_cylinder() { return jittered(generate_cylinder(1.0, -0.3, 0.3, 0.25), 0.02, 22); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(TangentialJacobian, IdentityField) {
  const auto m = bumpy_sphere();
  const auto J = tangential_jacobian(m, positions(m));
  for (int f = 0; f < static_cast<int>(m.num_faces()); ++f) {
    const Vec3& n = m.normal(f);
    EXPECT_LE((J[f] - (Mat3::Identity() - n * n.transpose())).norm(), 1e-12);
  }
}

TEST(TangentialJacobian, ConstantFieldVanishes) {
  const auto m = bumpy_sphere();
  for (const auto& J : tangential_jacobian(m, constant_field(m.num_vertices(), Vec3(1, -2, 3)))) {
    EXPECT_LE(J.norm(), 1e-12);
  }
}

TEST(TangentialJacobian, RotationIsDivergenceFree) {
  const auto m = bumpy_sphere();
  for (const auto& J : tangential_jacobian(m, rotation_field(m, Vec3(0.3, -1.1, 0.7)))) {
    EXPECT_NEAR(J.trace(), 0.0, 1e-12);
  }
}

TEST(AreaDerivatives, ConstantAndScalingFields) {
  const auto m = bumpy_sphere();
  const auto all = RegionFilter::all();
  const double S = surface_area(m);
  const auto c = constant_field(m.num_vertices(), Vec3(0.5, 1.0, -2.0));
  EXPECT_NEAR(dS(m, all, c), 0.0, 1e-12 * S);
  EXPECT_NEAR(dS(m, all, positions(m)), 2.0 * S, 1e-12 * S);
  EXPECT_NEAR(d2S(m, all, c, c), 0.0, 1e-12 * S);
  EXPECT_NEAR(d2S(m, all, positions(m), positions(m)), 2.0 * S, 1e-12 * S);
}

TEST(AreaDerivatives, MatchFiniteDifferences) {
  const auto m = bumpy_cylinder();
  std::mt19937 rng(3);
  for (auto filter : {RegionFilter::all(), RegionFilter::liquid_air(), RegionFilter::liquid_solid(0)}) {
    const auto area = [&](const ShellMesh& x) { return surface_area(x, filter); };
    for (int k = 0; k < 3; ++k) {
      const auto V = random_field(m.num_vertices(), rng);
      const auto W = random_field(m.num_vertices(), rng);
      const double d = dS(m, filter, V);
      EXPECT_LE(rel(fd_gradient(area, m, V, default_eps_sweep(), d).value, d), 1e-6);
      const double h = d2S(m, filter, V, W);
      EXPECT_LE(rel(fd_hessian(area, m, V, W, 1e-4), h), 1e-4);
    }
  }
}

TEST(MatDiv, ScalingFieldAndSymmetry) {
  const auto m = bumpy_sphere();
  for (double v : mat_div(m, positions(m), positions(m))) EXPECT_NEAR(v, -2.0, 1e-12);
  std::mt19937 rng(4);
  const auto V = random_field(m.num_vertices(), rng);
  const auto W = random_field(m.num_vertices(), rng);
  const auto vw = mat_div(m, V, W);
  const auto wv = mat_div(m, W, V);
  for (std::size_t f = 0; f < vw.size(); ++f) EXPECT_NEAR(vw[f], wv[f], 1e-12 * (1 + std::abs(vw[f])));
  for (double v : mat_div(m, constant_field(m.num_vertices(), Vec3::UnitX()),
                          constant_field(m.num_vertices(), Vec3::UnitX()))) {
    EXPECT_NEAR(v, 0.0, 1e-14);
  }
}

TEST(NormalDerivative, RotationAndScaling) {
  const auto m = bumpy_sphere();
  const Vec3 w(0.4, -0.2, 0.9);
  const auto dnr = dn(m, rotation_field(m, w));
  const auto dns = dn(m, positions(m));
  for (int f = 0; f < static_cast<int>(m.num_faces()); ++f) {
    EXPECT_LE((dnr[f] - w.cross(m.normal(f))).norm(), 1e-12);
    EXPECT_LE(dns[f].norm(), 1e-12);
  }
}

TEST(NormalDerivative, MatchesFiniteDifferences) {
  const auto m = bumpy_sphere();
  std::mt19937 rng(5);
  const auto V = random_field(m.num_vertices(), rng);
  const auto W = random_field(m.num_vertices(), rng);
  const double e = 1e-6;
  const auto plus = m.displaced(V, e);
  const auto minus = m.displaced(V, -e);
  const auto d = dn(m, V);
  for (int f = 0; f < static_cast<int>(m.num_faces()); ++f) {
    const Vec3 fd = (plus.normal(f) - minus.normal(f)) / (2 * e);
    EXPECT_LE((fd - d[f]).norm(), 1e-6 * std::max(1.0, d[f].norm()));
  }
  const double h = 1e-4;
  const auto dd = ddn(m, V, W);
  const auto pp = displaced2(m, V, h, W, h), pm = displaced2(m, V, h, W, -h);
  const auto mp = displaced2(m, V, -h, W, h), mm = displaced2(m, V, -h, W, -h);
  for (int f = 0; f < static_cast<int>(m.num_faces()); ++f) {
    const Vec3 fd = (pp.normal(f) - pm.normal(f) - mp.normal(f) + mm.normal(f)) / (4 * h * h);
    EXPECT_LE((fd - dd[f]).norm(), 1e-4 * std::max(1.0, dd[f].norm()));
  }
}

TEST(NormalDerivative, SecondOrderIdentities) {
  const auto m = bumpy_sphere();
  for (const auto& v : ddn(m, positions(m), positions(m))) EXPECT_LE(v.norm(), 1e-12);
  std::mt19937 rng(6);
  const auto V = random_field(m.num_vertices(), rng);
  const auto W = random_field(m.num_vertices(), rng);
  const auto a = ddn(m, V, W);
  const auto b = ddn(m, W, V);
  for (std::size_t f = 0; f < a.size(); ++f) EXPECT_LE((a[f] - b[f]).norm(), 1e-12 * (1 + a[f].norm()));
}

TEST(IntegrandPairs, PointValues) {
  EXPECT_EQ(make_pair_F().f2(Vec3(3, 0, 0)), Vec3(1, 0, 0));
  EXPECT_EQ(make_pair_G(Vec3::UnitZ()).f2(Vec3(0, 0, 2)), Vec3(0, 0, 2));
  EXPECT_EQ(make_pair_centroid(0).f2(Vec3(2, 5, 7)), Vec3(2, 0, 0));
}

TEST(VolumeDerivatives, ScalingAndTranslation) {
  const auto m = bumpy_sphere();
  const auto F = make_pair_F();
  const double vol = enclosed_volume(m);
  const auto c = constant_field(m.num_vertices(), Vec3(1, 2, 3));
  EXPECT_NEAR(J2(m, F), vol, 1e-14 * vol);
  EXPECT_NEAR(dJ2(m, F, c), 0.0, 1e-12 * vol);
  EXPECT_NEAR(dJ2(m, F, positions(m)), 3.0 * vol, 1e-8 * vol);
  EXPECT_NEAR(d2J2(m, F, positions(m), positions(m)), 6.0 * vol, 1e-12 * vol);
  EXPECT_NEAR(d2J2(m, F, c, c), 0.0, 1e-12 * vol);
}

TEST(VolumeDerivatives, MatchFiniteDifferences) {
  const auto m = bumpy_sphere();
  std::mt19937 rng(7);
  for (const auto& pair : {make_pair_F(), make_pair_G(Vec3(0.0, 0.6, 0.8)), make_pair_centroid(2)}) {
    const auto J = [&](const ShellMesh& x) { return J2(x, pair); };
    for (int k = 0; k < 3; ++k) {
      const auto V = random_field(m.num_vertices(), rng);
      const auto W = random_field(m.num_vertices(), rng);
      const double d = dJ2(m, pair, V);
      EXPECT_LE(rel(fd_gradient(J, m, V, default_eps_sweep(), d).value, d), 1e-6);
      EXPECT_LE(rel(fd_hessian(J, m, V, W, 1e-4), d2J2(m, pair, V, W)), 1e-4);
    }
  }
}

TEST(GravityDerivative, CubeAlongAxis) {
  const auto m = unit_cube(3);
  const auto G = make_pair_G(Vec3(0, 0, -1));
  const auto V = constant_field(m.num_vertices(), Vec3::UnitZ());
  const auto J = [&](const ShellMesh& x) { return J2(x, G); };
  const double d = dJ2(m, G, V);
  EXPECT_NEAR(d, -1.0, 1e-14);  // shifting the unit cube up by t changes G by -t
  EXPECT_LE(rel(fd_gradient(J, m, V, default_eps_sweep(), d).value, d), 1e-6);
}

TEST(DistanceDerivatives, Examples) {
  const auto plane = plane_field(0.0);
  EXPECT_DOUBLE_EQ(ddist(plane, Vec3(0, 0, 1), Vec3(0, 0, -1)), -1.0);
  const auto sphere = sphere_field(Vec3(0, 0, 1), 1.0);
  const Vec3 s = Vec3(0, 0, 1) + Vec3(1, 1, -1).normalized();
  const Vec3 t = Vec3(1, -1, 0).normalized() * 0.7;  // tangent at s
  EXPECT_NEAR(ddist(sphere, s, t), 0.0, 1e-15);
  EXPECT_NEAR(d2dist(sphere, s, t, t), t.squaredNorm(), 1e-15);
  EXPECT_EQ(d2dist(plane, s, t, Vec3(1, 2, 3)), 0.0);
}

TEST(DistanceDerivatives, MatchFiniteDifferences) {
  std::mt19937 rng(8);
  std::normal_distribution<double> n;
  const auto sphere = sphere_field(Vec3(0.2, 0.1, 1.0), 1.0);
  for (int k = 0; k < 20; ++k) {
    const Vec3 s(n(rng), n(rng), n(rng));
    const Vec3 v(n(rng), n(rng), n(rng));
    const Vec3 w(n(rng), n(rng), n(rng));
    const double e = 1e-6;
    const double fd = (sphere.dist(s + e * v) - sphere.dist(s - e * v)) / (2 * e);
    EXPECT_NEAR(fd, ddist(sphere, s, v), 1e-8 * std::max(1.0, v.norm()));
    const double fd2 = (ddist(sphere, s + e * w, v) - ddist(sphere, s - e * w, v)) / (2 * e);
    EXPECT_NEAR(fd2, d2dist(sphere, s, v, w), 1e-5 * std::max(1.0, std::abs(fd2)));
  }
}

TEST(ElementDerivatives, AgreeWithFieldFormulas) {
  const auto m = bumpy_cylinder();
  std::mt19937 rng(9);
  const auto V = random_field(m.num_vertices(), rng);
  const auto W = random_field(m.num_vertices(), rng);
  const auto pair = make_pair_G(Vec3(0.6, 0.0, 0.8));
  double ds = 0.0, d2s = 0.0, dg = 0.0, d2g = 0.0;
  for (int f = 0; f < static_cast<int>(m.num_faces()); ++f) {
    Eigen::Matrix<double, 9, 1> v, w;
    for (int k = 0; k < 3; ++k) {
      v.segment<3>(3 * k) = V[m.triangle(f)[k]];
      w.segment<3>(3 * k) = W[m.triangle(f)[k]];
    }
    const auto a = area_element(m, f);
    const auto g = j2_element(m, f, pair);
    ds += a.grad.dot(v);
    d2s += v.dot(a.hess * w);
    dg += g.grad.dot(v);
    d2g += v.dot(g.hess * w);
    EXPECT_LE((a.hess - a.hess.transpose()).norm(), 1e-12 * (1 + a.hess.norm()));
    EXPECT_LE((g.hess - g.hess.transpose()).norm(), 1e-12 * (1 + g.hess.norm()));
  }
  const auto all = RegionFilter::all();
  EXPECT_LE(rel(ds, dS(m, all, V)), 1e-12);
  EXPECT_LE(rel(d2s, d2S(m, all, V, W)), 1e-11);
  EXPECT_LE(rel(dg, dJ2(m, pair, V)), 1e-12);
  EXPECT_LE(rel(d2g, d2J2(m, pair, V, W)), 1e-11);
}

TEST(OracleSuite, ShortRunPasses) {
  for (const auto& c : run_identity_checks(3)) EXPECT_TRUE(c.passed()) << c.name << " " << c.max_rel_error;
  for (const auto& c : run_derivative_oracles(5, 3)) EXPECT_TRUE(c.passed()) << c.name << " " << c.max_rel_error;
}

TEST(FdHarness, EpsSweepAndPlateau) {
  const auto sweep = default_eps_sweep();
  EXPECT_DOUBLE_EQ(sweep.front(), 1e-2);
  EXPECT_NEAR(sweep.back(), 1e-7, 1e-15);
  const auto m = bumpy_sphere();
  const auto V = positions(m);
  const auto r = fd_gradient([](const ShellMesh& x) { return enclosed_volume(x); }, m, V);
  EXPECT_NEAR(r.value, 3.0 * enclosed_volume(m), 1e-6);
  EXPECT_EQ(r.curve.size(), sweep.size());
}
