#include "capbridge/remesh.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <numbers>

#include "capbridge/errors.hpp"

namespace capbridge {

void RemeshParams::validate() const {
  if (!enabled()) throw ParameterError("remesh needs a target edge length or cell count");
  if (target_edge_length < 0.0) throw ParameterError("target_edge_length must be positive");
  if (iterations < 1) throw ParameterError("remesh iterations must be at least 1");
  if (!(smoothing > 0.0 && smoothing <= 1.0)) throw ParameterError("smoothing must be in (0, 1]");
}

Vec3 project_to_obstacle(const Vec3& point, const ObstacleField& field) {
  Vec3 x = point;
  for (int it = 0; it < 50; ++it) {
    const auto s = field.eval(x);
    if (std::abs(s.dist) <= 1e-10) return x;
    const double g2 = s.grad.squaredNorm();
    if (g2 < 1e-24) throw NumericalFailure("projection stalled: vanishing distance gradient");
    x -= s.dist * s.grad / g2;
  }
  throw NumericalFailure("projection onto obstacle did not converge in 50 iterations");
}

double edge_length_for_cell_count(const ShellMesh& mesh, std::size_t cells) {
  if (cells == 0) throw ParameterError("cell count must be positive");
  return std::sqrt(4.0 * surface_area(mesh) / (std::sqrt(3.0) * static_cast<double>(cells)));
}

namespace {

constexpr double kAngleFloor = 10.0 * std::numbers::pi / 180.0;
constexpr int kMixed = -2;  // vertex touching two solid regions

// Region of a vertex's faces; triple vertices carry the solid tag.
struct VertexClass {
  RegionTag tag = kLiquidAir;
  bool triple = false;
};

class Workspace {
 public:
  Workspace(const ShellMesh& mesh, const RemeshParams& params,
            std::span<const ObstacleField> obstacles)
      : pos_(mesh.vertices()),
        tris_(mesh.triangles()),
        tags_(mesh.face_regions()),
        alive_(mesh.num_faces(), 1),
        vf_(mesh.num_vertices()),
        obstacles_(obstacles),
        L_(params.target_edge_length),
        preserve_(params.preserve_triple_lines),
        lambda_(params.smoothing) {
    for (int f = 0; f < static_cast<int>(tris_.size()); ++f) {
      for (int v : tris_[f]) vf_[v].push_back(f);
    }
  }

  void run(int iterations) {
    for (int it = 0; it < iterations; ++it) {
      split_long();
      collapse_short();
      flip_valence();
      for (int k = 0; k < 3; ++k) smooth();
    }
    project_all();
  }

  ShellMesh build() const {
    std::vector<int> remap(pos_.size(), -1);
    std::vector<Vec3> verts;
    std::vector<Triangle> tris;
    std::vector<RegionTag> tags;
    for (int f = 0; f < static_cast<int>(tris_.size()); ++f) {
      if (!alive_[f]) continue;
      Triangle t;
      for (int k = 0; k < 3; ++k) {
        int& r = remap[tris_[f][k]];
        if (r < 0) {
          r = static_cast<int>(verts.size());
          verts.push_back(pos_[tris_[f][k]]);
        }
        t[k] = r;
      }
      tris.push_back(t);
      tags.push_back(tags_[f]);
    }
    return ShellMesh(std::move(verts), std::move(tris), std::move(tags));
  }

 private:
  // --- connectivity helpers ---

  std::vector<int> edge_faces(int a, int b) const {
    std::vector<int> out;
    for (int f : vf_[a]) {
      const auto& t = tris_[f];
      if (t[0] == b || t[1] == b || t[2] == b) out.push_back(f);
    }
    return out;
  }

  std::vector<int> neighbors(int v) const {
    std::vector<int> out;
    for (int f : vf_[v]) {
      for (int u : tris_[f]) {
        if (u != v) out.push_back(u);
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  int opposite(int f, int a, int b) const {
    for (int u : tris_[f]) {
      if (u != a && u != b) return u;
    }
    return -1;
  }

  void set_face(int f, const Triangle& t) {
    for (int v : tris_[f]) {
      auto& l = vf_[v];
      l.erase(std::remove(l.begin(), l.end(), f), l.end());
    }
    tris_[f] = t;
    for (int v : t) vf_[v].push_back(f);
  }

  int add_face(const Triangle& t, RegionTag tag) {
    const int f = static_cast<int>(tris_.size());
    tris_.push_back(t);
    tags_.push_back(tag);
    alive_.push_back(1);
    for (int v : t) vf_[v].push_back(f);
    return f;
  }

  void kill_face(int f) {
    for (int v : tris_[f]) {
      auto& l = vf_[v];
      l.erase(std::remove(l.begin(), l.end(), f), l.end());
    }
    alive_[f] = 0;
  }

  int add_vertex(const Vec3& p) {
    pos_.push_back(p);
    vf_.emplace_back();
    return static_cast<int>(pos_.size()) - 1;
  }

  VertexClass classify(int v) const {
    VertexClass c;
    bool la = false;
    RegionTag solid = kLiquidAir;
    for (int f : vf_[v]) {
      const RegionTag t = tags_[f];
      if (t == kLiquidAir) {
        la = true;
      } else if (solid == kLiquidAir) {
        solid = t;
      } else if (solid != t) {
        solid = kMixed;
      }
    }
    if (solid == kMixed) return {kMixed, true};
    if (solid == kLiquidAir) return {kLiquidAir, false};
    c.tag = solid;
    c.triple = la;
    return c;
  }

  bool is_feature_edge(int a, int b) const {
    const auto fs = edge_faces(a, b);
    return fs.size() == 2 && tags_[fs[0]] != tags_[fs[1]];
  }

  // Neighbours of a triple vertex along its contact line.
  std::vector<int> line_neighbors(int v) const {
    std::vector<int> out;
    for (int u : neighbors(v)) {
      if (is_feature_edge(v, u)) out.push_back(u);
    }
    return out;
  }

  Vec3 face_normal_at(const Triangle& t, const std::vector<Vec3>& p) const {
    return (p[t[1]] - p[t[0]]).cross(p[t[2]] - p[t[0]]);
  }

  Vec3 raw_normal(int f) const { return face_normal_at(tris_[f], pos_); }

  Vec3 project(const Vec3& p, RegionTag tag) const {
    if (tag <= 0 || obstacle_of(tag) >= obstacles_.size()) return p;
    return project_to_obstacle(p, obstacles_[obstacle_of(tag)]);
  }

  static double min_angle(const Vec3& a, const Vec3& b, const Vec3& c) {
    const auto ang = [](const Vec3& p, const Vec3& q, const Vec3& r) {
      const Vec3 u = q - p, w = r - p;
      return std::atan2(u.cross(w).norm(), u.dot(w));
    };
    return std::min({ang(a, b, c), ang(b, c, a), ang(c, a, b)});
  }
  double min_angle(const Triangle& t) const { return min_angle(pos_[t[0]], pos_[t[1]], pos_[t[2]]); }

  // Faces in `faces` keep their orientation and a sane shape when vertex v
  // moves to p (and `renamed`, if >= 0, is replaced by v).
  bool moves_ok(const std::vector<int>& faces, int v, const Vec3& p, int renamed = -1) const {
    for (int f : faces) {
      Triangle t = tris_[f];
      const Vec3 before = raw_normal(f);
      std::array<Vec3, 3> q;
      for (int k = 0; k < 3; ++k) {
        const int u = (t[k] == renamed) ? v : t[k];
        q[k] = (u == v) ? p : pos_[u];
      }
      const Vec3 after = (q[1] - q[0]).cross(q[2] - q[0]);
      const double an = after.norm();
      const double bn = before.norm();
      if (an <= 1e-12 * L_ * L_) return false;
      if (after.dot(before) < 0.5 * an * bn) return false;
      if (min_angle(q[0], q[1], q[2]) < std::min(kAngleFloor, min_angle(t))) return false;
    }
    return true;
  }

  template <class Fn>
  void for_each_edge(Fn&& fn) const {
    for (int f = 0; f < static_cast<int>(tris_.size()); ++f) {
      if (!alive_[f]) continue;
      for (int k = 0; k < 3; ++k) {
        const int a = tris_[f][k];
        const int b = tris_[f][(k + 1) % 3];
        if (a < b) fn(a, b);
      }
    }
  }

  // --- operations ---

  void split_long() {
    const double hi = 4.0 / 3.0 * L_;
    for (int pass = 0; pass < 12; ++pass) {
      std::vector<std::pair<int, int>> todo;
      for_each_edge([&](int a, int b) {
        if ((pos_[a] - pos_[b]).norm() > hi) todo.emplace_back(a, b);
      });
      if (todo.empty()) return;
      for (auto [a, b] : todo) split(a, b);
    }
  }

  void split(int a, int b) {
    const auto fs = edge_faces(a, b);
    if (fs.size() != 2) return;
    RegionTag tag0 = tags_[fs[0]], tag1 = tags_[fs[1]];
    Vec3 m = 0.5 * (pos_[a] + pos_[b]);
    if (tag0 != tag1) {
      const RegionTag solid = tag0 == kLiquidAir ? tag1 : tag0;
      if (tag0 != kLiquidAir && tag1 != kLiquidAir) return;
      m = project(m, solid);
    } else if (tag0 != kLiquidAir) {
      m = project(m, tag0);
    }
    const int mv = add_vertex(m);
    for (int f : fs) {
      const Triangle t = tris_[f];
      int k = 0;
      while (!(t[k] == a && t[(k + 1) % 3] == b) && !(t[k] == b && t[(k + 1) % 3] == a)) ++k;
      const int p = t[k], q = t[(k + 1) % 3], r = t[(k + 2) % 3];
      set_face(f, {p, mv, r});
      add_face({mv, q, r}, tags_[f]);
    }
  }

  void collapse_short() {
    const double lo = 4.0 / 5.0 * L_;
    std::vector<std::pair<int, int>> todo;
    for_each_edge([&](int a, int b) {
      if ((pos_[a] - pos_[b]).norm() < lo) todo.emplace_back(a, b);
    });
    std::map<RegionTag, int> line_size;
    for (int v = 0; v < static_cast<int>(pos_.size()); ++v) {
      if (vf_[v].empty()) continue;
      const auto c = classify(v);
      if (c.triple && c.tag > 0) ++line_size[c.tag];
    }
    for (auto [a, b] : todo) {
      if (vf_[a].empty() || vf_[b].empty()) continue;
      if ((pos_[a] - pos_[b]).norm() >= lo) continue;
      collapse(a, b, line_size);
    }
  }

  void collapse(int a, int b, std::map<RegionTag, int>& line_size) {
    const auto fs = edge_faces(a, b);
    if (fs.size() != 2) return;
    VertexClass ca = classify(a), cb = classify(b);
    if (ca.tag == kMixed || cb.tag == kMixed) return;
    const bool feature = tags_[fs[0]] != tags_[fs[1]];

    Vec3 p;
    if (ca.triple && cb.triple) {
      if (!feature || ca.tag != cb.tag) return;
      if (preserve_ && line_size[ca.tag] <= 6) return;
      p = project(0.5 * (pos_[a] + pos_[b]), ca.tag);
    } else if (ca.triple || cb.triple) {
      if (ca.triple) {
        std::swap(a, b);
        std::swap(ca, cb);
      }
      p = pos_[b];  // a moves onto the contact line vertex b
    } else {
      if (ca.tag != cb.tag) return;
      p = project(0.5 * (pos_[a] + pos_[b]), ca.tag);
    }

    const int c = opposite(fs[0], a, b);
    const int d = opposite(fs[1], a, b);
    if (c == d) return;
    // Link condition.
    const auto na = neighbors(a);
    const auto nb = neighbors(b);
    std::vector<int> common;
    std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
    if (common.size() != 2) return;
    if (neighbors(c).size() <= 3 || neighbors(d).size() <= 3) return;

    const double hi = 4.0 / 3.0 * L_;
    for (int u : na) {
      if (u != b && (pos_[u] - p).norm() > hi) return;
    }
    for (int u : nb) {
      if (u != a && (pos_[u] - p).norm() > hi) return;
    }

    std::vector<int> ring;
    for (int f : vf_[a]) {
      if (f != fs[0] && f != fs[1]) ring.push_back(f);
    }
    std::vector<int> ring_b;
    for (int f : vf_[b]) {
      if (f != fs[0] && f != fs[1]) ring_b.push_back(f);
    }
    // Rename a -> b and move b to p.
    if (!moves_ok(ring, b, p, a)) return;
    if (!moves_ok(ring_b, b, p)) return;

    if (ca.triple && cb.triple) --line_size[ca.tag];
    kill_face(fs[0]);
    kill_face(fs[1]);
    for (int f : ring) {
      Triangle t = tris_[f];
      for (int& u : t) {
        if (u == a) u = b;
      }
      set_face(f, t);
    }
    pos_[b] = p;
  }

  void flip_valence() {
    std::vector<int> valence(pos_.size(), 0);
    for_each_edge([&](int a, int b) {
      ++valence[a];
      ++valence[b];
    });
    std::vector<std::pair<int, int>> edges;
    for_each_edge([&](int a, int b) { edges.emplace_back(a, b); });
    for (auto [a, b] : edges) {
      const auto fs = edge_faces(a, b);
      if (fs.size() != 2 || tags_[fs[0]] != tags_[fs[1]]) continue;
      // Orient as f1 = (a, b, c), f2 = (b, a, d).
      int f1 = fs[0], f2 = fs[1];
      const auto has_ab = [&](int f) {
        const auto& t = tris_[f];
        for (int k = 0; k < 3; ++k) {
          if (t[k] == a && t[(k + 1) % 3] == b) return true;
        }
        return false;
      };
      if (!has_ab(f1)) std::swap(f1, f2);
      if (!has_ab(f1)) continue;
      const int c = opposite(f1, a, b);
      const int d = opposite(f2, a, b);
      if (c == d || !edge_faces(c, d).empty()) continue;

      auto dev = [](int n) { return (n - 6) * (n - 6); };
      const int before = dev(valence[a]) + dev(valence[b]) + dev(valence[c]) + dev(valence[d]);
      const int after = dev(valence[a] - 1) + dev(valence[b] - 1) + dev(valence[c] + 1) +
                        dev(valence[d] + 1);
      if (after >= before) continue;
      if (valence[a] <= 3 || valence[b] <= 3) continue;

      const Triangle t1{c, a, d}, t2{d, b, c};
      const Vec3 n1 = face_normal_at(t1, pos_);
      const Vec3 n2 = face_normal_at(t2, pos_);
      const Vec3 o = raw_normal(f1).normalized() + raw_normal(f2).normalized();
      if (n1.norm() <= 1e-12 * L_ * L_ || n2.norm() <= 1e-12 * L_ * L_) continue;
      if (n1.normalized().dot(n2.normalized()) < 0.8) continue;
      if (n1.dot(o) <= 0.0 || n2.dot(o) <= 0.0) continue;
      const double old_min = std::min(min_angle(tris_[f1]), min_angle(tris_[f2]));
      if (std::min(min_angle(t1), min_angle(t2)) < std::min(old_min, kAngleFloor)) continue;

      set_face(f1, t1);
      set_face(f2, t2);
      --valence[a];
      --valence[b];
      ++valence[c];
      ++valence[d];
    }
  }

  void smooth() {
    std::vector<Vec3> next = pos_;
    for (int v = 0; v < static_cast<int>(pos_.size()); ++v) {
      if (vf_[v].empty()) continue;
      const auto cls = classify(v);
      if (cls.tag == kMixed) continue;
      Vec3 target;
      if (cls.triple) {
        const auto ln = line_neighbors(v);
        if (ln.size() != 2) continue;
        const Vec3 t = (pos_[ln[1]] - pos_[ln[0]]).normalized();
        const Vec3 mid = 0.5 * (pos_[ln[0]] + pos_[ln[1]]);
        target = pos_[v] + lambda_ * (mid - pos_[v]).dot(t) * t;
        target = project(target, cls.tag);
      } else {
        // Area-weighted centroid of the one-ring.
        Vec3 c = Vec3::Zero();
        Vec3 n = Vec3::Zero();
        double w = 0.0;
        for (int f : vf_[v]) {
          const auto& t = tris_[f];
          const Vec3 fn = raw_normal(f);
          const double a = 0.5 * fn.norm();
          c += a * (pos_[t[0]] + pos_[t[1]] + pos_[t[2]]) / 3.0;
          n += fn;
          w += a;
        }
        if (w <= 0.0 || n.norm() == 0.0) continue;
        c /= w;
        n.normalize();
        Vec3 d = lambda_ * (c - pos_[v]);
        d -= d.dot(n) * n;
        target = project(pos_[v] + d, cls.tag);
      }
      if (moves_ok(vf_[v], v, target)) next[v] = target;
    }
    // Sequential acceptance against the updated neighbours keeps faces valid.
    for (int v = 0; v < static_cast<int>(pos_.size()); ++v) {
      if (next[v] == pos_[v]) continue;
      if (moves_ok(vf_[v], v, next[v])) pos_[v] = next[v];
    }
  }

  void project_all() {
    for (int v = 0; v < static_cast<int>(pos_.size()); ++v) {
      if (vf_[v].empty()) continue;
      const auto cls = classify(v);
      if (cls.tag > 0) pos_[v] = project(pos_[v], cls.tag);
    }
  }

  std::vector<Vec3> pos_;
  std::vector<Triangle> tris_;
  std::vector<RegionTag> tags_;
  std::vector<char> alive_;
  std::vector<std::vector<int>> vf_;
  std::span<const ObstacleField> obstacles_;
  double L_;
  bool preserve_;
  double lambda_;
};

}  // namespace

ShellMesh remesh(const ShellMesh& mesh, const RemeshParams& params,
                 std::span<const ObstacleField> obstacles) {
  params.validate();
  if (!mesh.is_closed()) throw PreconditionError("remesh requires a closed mesh");
  if (mesh.num_obstacle_regions() > obstacles.size()) {
    throw PreconditionError("mesh tags name an obstacle that is not defined");
  }
  RemeshParams p = params;
  if (p.target_cells > 0) p.target_edge_length = edge_length_for_cell_count(mesh, p.target_cells);
  Workspace ws(mesh, p, obstacles);
  ws.run(p.iterations);
  try {
    return ws.build();
  } catch (const Error& e) {
    throw DegenerateGeometryError(std::string("remesh produced an invalid mesh: ") + e.what());
  }
}

}  // namespace capbridge
