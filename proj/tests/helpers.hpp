#pragma once

#include <random>

#include "capbridge/mesh.hpp"

namespace capbridge::testing {

inline VertexField random_field(std::size_t n, std::mt19937& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  VertexField out(n);
  for (auto& v : out) v = Vec3(normal(rng), normal(rng), normal(rng));
  return out;
}

inline VertexField positions(const ShellMesh& mesh) { return mesh.vertices(); }

inline VertexField constant_field(std::size_t n, const Vec3& c) { return VertexField(n, c); }

inline VertexField rotation_field(const ShellMesh& mesh, const Vec3& omega) {
  VertexField out;
  for (const auto& s : mesh.vertices()) out.push_back(omega.cross(s));
  return out;
}

inline ShellMesh jittered(const ShellMesh& mesh, double amount, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-amount, amount);
  auto p = mesh.vertices();
  for (auto& x : p) x += Vec3(u(rng), u(rng), u(rng));
  return mesh.with_vertices(std::move(p));
}

// Signed tetrahedra from the origin: int_Omega x dx and |Omega|.
struct TetMoments {
  double volume = 0.0;
  Vec3 first = Vec3::Zero();
};

inline TetMoments tet_moments(const ShellMesh& mesh) {
  TetMoments m;
  for (const auto& t : mesh.triangles()) {
    const Vec3& a = mesh.vertex(t[0]);
    const Vec3& b = mesh.vertex(t[1]);
    const Vec3& c = mesh.vertex(t[2]);
    const double vol = a.dot(b.cross(c)) / 6.0;
    m.volume += vol;
    m.first += vol * (a + b + c) / 4.0;
  }
  return m;
}

inline ShellMesh unit_cube(int divisions = 2) {
  return generate_box(Vec3::Zero(), Vec3::Ones(), divisions);
}

}  // namespace capbridge::testing
