#include <cmath>
#include <map>
#include <numbers>

#include "capbridge/errors.hpp"
#include "capbridge/mesh.hpp"

namespace capbridge {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Triangulates the annulus between two concentric rings of increasing angle,
// counter-clockwise seen from +x3. `inner` may hold a single centre vertex.
void stitch_rings(const std::vector<int>& inner, const std::vector<int>& outer,
                  std::vector<Triangle>& out) {
  const std::size_t a = inner.size();
  const std::size_t b = outer.size();
  if (a == 1) {
    for (std::size_t j = 0; j < b; ++j) out.push_back({inner[0], outer[j], outer[(j + 1) % b]});
    return;
  }
  std::size_t i = 0, j = 0;
  while (i < a || j < b) {
    const double next_inner = static_cast<double>(i + 1) / static_cast<double>(a);
    const double next_outer = static_cast<double>(j + 1) / static_cast<double>(b);
    if (j < b && (i >= a || next_outer <= next_inner)) {
      out.push_back({inner[i % a], outer[j], outer[(j + 1) % b]});
      ++j;
    } else {
      out.push_back({inner[i % a], outer[j % b], inner[(i + 1) % a]});
      ++i;
    }
  }
}

}  // namespace

ShellMesh generate_cylinder(double radius, double z_min, double z_max,
                            double target_edge_length) {
  if (!(radius > 0.0)) throw ParameterError("cylinder radius must be > 0");
  if (!(z_max > z_min)) throw ParameterError("cylinder requires z_max > z_min");
  if (!(target_edge_length > 0.0)) throw ParameterError("target edge length must be > 0");
  const int rings = static_cast<int>(std::lround(radius / target_edge_length));
  if (rings < 1) {
    throw ParameterError("target edge length too coarse to close the cylinder");
  }
  const int around = 6 * rings;
  const int layers =
      std::max(1, static_cast<int>(std::lround((z_max - z_min) / target_edge_length)));

  std::vector<Vec3> pts;
  std::vector<Triangle> tris;
  std::vector<RegionTag> tags;

  // Side rings, bottom to top.
  std::vector<std::vector<int>> side(layers + 1);
  for (int l = 0; l <= layers; ++l) {
    const double z = z_min + (z_max - z_min) * l / layers;
    for (int m = 0; m < around; ++m) {
      const double phi = kTwoPi * m / around;
      side[l].push_back(static_cast<int>(pts.size()));
      pts.emplace_back(radius * std::cos(phi), radius * std::sin(phi), z);
    }
  }
  for (int l = 0; l < layers; ++l) {
    for (int m = 0; m < around; ++m) {
      const int b0 = side[l][m], b1 = side[l][(m + 1) % around];
      const int t0 = side[l + 1][m], t1 = side[l + 1][(m + 1) % around];
      tris.push_back({b0, b1, t1});
      tris.push_back({b0, t1, t0});
      tags.push_back(kLiquidAir);
      tags.push_back(kLiquidAir);
    }
  }

  auto add_cap = [&](double z, const std::vector<int>& boundary, bool upward, RegionTag tag) {
    std::vector<std::vector<int>> ring(rings + 1);
    ring[0].push_back(static_cast<int>(pts.size()));
    pts.emplace_back(0.0, 0.0, z);
    for (int k = 1; k < rings; ++k) {
      const double r = radius * k / rings;
      for (int m = 0; m < 6 * k; ++m) {
        const double phi = kTwoPi * m / (6 * k);
        ring[k].push_back(static_cast<int>(pts.size()));
        pts.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
      }
    }
    ring[rings] = boundary;
    std::vector<Triangle> cap;
    for (int k = 1; k <= rings; ++k) stitch_rings(ring[k - 1], ring[k], cap);
    for (auto t : cap) {
      if (!upward) std::swap(t[1], t[2]);
      tris.push_back(t);
      tags.push_back(tag);
    }
  };
  add_cap(z_max, side[layers], true, liquid_solid(0));
  add_cap(z_min, side[0], false, liquid_solid(1));

  return ShellMesh(std::move(pts), std::move(tris), std::move(tags));
}

ShellMesh generate_icosphere(double radius, int subdivisions, const Vec3& center) {
  if (!(radius > 0.0)) throw ParameterError("sphere radius must be > 0");
  if (subdivisions < 0) throw ParameterError("subdivisions must be >= 0");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> pts = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                           {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                           {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : pts) p.normalize();
  std::vector<Triangle> tris = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      const int idx = static_cast<int>(pts.size());
      pts.push_back((pts[a] + pts[b]).normalized());
      mid.emplace(key, idx);
      return idx;
    };
    std::vector<Triangle> next;
    next.reserve(tris.size() * 4);
    for (const auto& tri : tris) {
      const int ab = midpoint(tri[0], tri[1]);
      const int bc = midpoint(tri[1], tri[2]);
      const int ca = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    tris = std::move(next);
  }
  for (auto& p : pts) p = center + radius * p;
  return ShellMesh(std::move(pts), std::move(tris));
}

ShellMesh generate_box(const Vec3& lo, const Vec3& hi, int divisions) {
  if (divisions < 1) throw ParameterError("box divisions must be >= 1");
  if (!((hi - lo).minCoeff() > 0.0)) throw ParameterError("box requires hi > lo");
  const int d = divisions;
  std::map<std::array<int, 3>, int> index;
  std::vector<Vec3> pts;
  auto vertex = [&](std::array<int, 3> ijk) {
    auto it = index.find(ijk);
    if (it != index.end()) return it->second;
    const int idx = static_cast<int>(pts.size());
    Vec3 p;
    for (int c = 0; c < 3; ++c) p[c] = lo[c] + (hi[c] - lo[c]) * ijk[c] / d;
    pts.push_back(p);
    index.emplace(ijk, idx);
    return idx;
  };
  std::vector<Triangle> tris;
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      int u = (axis + 1) % 3, v = (axis + 2) % 3;
      if (side == 0) std::swap(u, v);
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          auto at = [&](int a, int b) {
            std::array<int, 3> ijk{};
            ijk[axis] = side == 0 ? 0 : d;
            ijk[u] = a;
            ijk[v] = b;
            return vertex(ijk);
          };
          tris.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
          tris.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
        }
      }
    }
  }
  return ShellMesh(std::move(pts), std::move(tris));
}

}  // namespace capbridge
