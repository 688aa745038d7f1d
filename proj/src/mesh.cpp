#include "capbridge/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>

#include <Eigen/Geometry>

#include "capbridge/errors.hpp"

namespace capbridge {

namespace {

constexpr double kDegenerateAreaFactor = 1e-14;

std::vector<int> empty_list;

double bbox_diagonal(const std::vector<Vec3>& pts) {
  if (pts.empty()) return 0.0;
  Vec3 lo = pts.front(), hi = pts.front();
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

void require_closed(const ShellMesh& mesh, const char* what) {
  if (!mesh.is_closed()) {
    throw PreconditionError(std::string(what) + " requires a closed mesh");
  }
}

// Edge midpoints of a triangle: the 3-point rule exact for quadratics.
std::array<Vec3, 3> edge_midpoints(const ShellMesh& mesh, int f) {
  const auto& t = mesh.triangle(f);
  const Vec3& a = mesh.vertex(t[0]);
  const Vec3& b = mesh.vertex(t[1]);
  const Vec3& c = mesh.vertex(t[2]);
  return {0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)};
}

}  // namespace

ShellMesh::ShellMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
                     std::vector<RegionTag> face_regions)
    : vertices_(std::move(vertices)) {
  if (face_regions.size() != triangles.size()) {
    throw PreconditionError("face region list does not match triangle count");
  }
  topo_ = build_topology(vertices_.size(), std::move(triangles), std::move(face_regions));
  derive_geometry();
}

ShellMesh::ShellMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : ShellMesh(std::move(vertices), triangles,
                std::vector<RegionTag>(triangles.size(), kLiquidAir)) {}

std::shared_ptr<const ShellMesh::Topology> ShellMesh::build_topology(
    std::size_t num_vertices, std::vector<Triangle> triangles,
    std::vector<RegionTag> regions) {
  auto topo = std::make_shared<Topology>();
  const int nv = static_cast<int>(num_vertices);
  const int nf = static_cast<int>(triangles.size());
  for (int f = 0; f < nf; ++f) {
    const auto& t = triangles[f];
    for (int k = 0; k < 3; ++k) {
      if (t[k] < 0 || t[k] >= nv) {
        throw PreconditionError("triangle " + std::to_string(f) +
                                " references a vertex out of range");
      }
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw DegenerateGeometryError("triangle " + std::to_string(f) +
                                    " repeats a vertex");
    }
    if (regions[f] < 0) {
      throw PreconditionError("negative region tag on face " + std::to_string(f));
    }
    topo->max_tag = std::max<std::size_t>(topo->max_tag, static_cast<std::size_t>(regions[f]));
  }

  topo->vertex_faces.assign(nv, {});
  topo->vertex_edges.assign(nv, {});
  topo->face_edges.assign(nf, {-1, -1, -1});

  // Directed traversal a -> b is stored so the second face can be checked for
  // opposite orientation.
  std::map<std::pair<int, int>, int> edge_index;
  std::vector<std::pair<int, int>> first_direction;
  for (int f = 0; f < nf; ++f) {
    const auto& t = triangles[f];
    for (int k = 0; k < 3; ++k) {
      topo->vertex_faces[t[k]].push_back(f);
      const int a = t[(k + 1) % 3];
      const int b = t[(k + 2) % 3];
      const auto key = std::minmax(a, b);
      auto it = edge_index.find(key);
      if (it == edge_index.end()) {
        const int e = static_cast<int>(topo->edges.size());
        edge_index.emplace(key, e);
        topo->edges.push_back(MeshEdge{{key.first, key.second}, {f, -1}});
        first_direction.emplace_back(a, b);
        topo->face_edges[f][k] = e;
      } else {
        const int e = it->second;
        auto& edge = topo->edges[e];
        if (edge.faces[1] != -1) {
          throw PreconditionError("non-manifold edge (" + std::to_string(key.first) + ", " +
                                  std::to_string(key.second) + ")");
        }
        if (first_direction[e] == std::make_pair(a, b)) {
          throw PreconditionError("inconsistent face orientation across edge (" +
                                  std::to_string(key.first) + ", " +
                                  std::to_string(key.second) + ")");
        }
        edge.faces[1] = f;
        topo->face_edges[f][k] = e;
      }
    }
  }

  topo->closed = nf > 0;
  for (int e = 0; e < static_cast<int>(topo->edges.size()); ++e) {
    const auto& edge = topo->edges[e];
    topo->vertex_edges[edge.vertices[0]].push_back(e);
    topo->vertex_edges[edge.vertices[1]].push_back(e);
    if (edge.faces[1] == -1) topo->closed = false;
  }

  const std::size_t nobs = topo->max_tag;
  topo->triple_edges.assign(nobs, {});
  topo->triple_vertices.assign(nobs, {});
  topo->wetted_vertices.assign(nobs, {});
  for (int e = 0; e < static_cast<int>(topo->edges.size()); ++e) {
    const auto& edge = topo->edges[e];
    if (edge.faces[1] == -1) continue;
    RegionTag r0 = regions[edge.faces[0]];
    RegionTag r1 = regions[edge.faces[1]];
    if (r0 == r1) continue;
    if (r0 == kLiquidAir && is_liquid_solid(r1)) std::swap(r0, r1);
    if (r1 == kLiquidAir && is_liquid_solid(r0)) {
      const std::size_t obs = obstacle_of(r0);
      topo->triple_edges[obs].push_back(e);
      topo->triple_vertices[obs].push_back(edge.vertices[0]);
      topo->triple_vertices[obs].push_back(edge.vertices[1]);
    }
  }
  for (int f = 0; f < nf; ++f) {
    if (is_liquid_solid(regions[f])) {
      for (int v : triangles[f]) topo->wetted_vertices[obstacle_of(regions[f])].push_back(v);
    }
  }
  auto sort_unique = [](std::vector<int>& list) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  };
  for (std::size_t i = 0; i < nobs; ++i) {
    sort_unique(topo->triple_vertices[i]);
    sort_unique(topo->wetted_vertices[i]);
  }

  topo->triangles = std::move(triangles);
  topo->regions = std::move(regions);
  return topo;
}

void ShellMesh::derive_geometry() {
  const std::size_t nf = num_faces();
  normals_.resize(nf);
  areas_.resize(nf);
  const double diag = bbox_diagonal(vertices_);
  const double tol = kDegenerateAreaFactor * diag * diag;
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& t = topo_->triangles[f];
    const Vec3& a = vertices_[t[0]];
    const Vec3& b = vertices_[t[1]];
    const Vec3& c = vertices_[t[2]];
    if (!a.allFinite() || !b.allFinite() || !c.allFinite()) {
      throw DegenerateGeometryError("non-finite vertex position in face " + std::to_string(f));
    }
    const Vec3 cr = (b - a).cross(c - a);
    const double twice_area = cr.norm();
    if (0.5 * twice_area <= tol) {
      throw DegenerateGeometryError("degenerate triangle " + std::to_string(f));
    }
    areas_[f] = 0.5 * twice_area;
    normals_[f] = cr / twice_area;
  }
}

const std::vector<int>& ShellMesh::triple_line_edges(std::size_t obstacle) const {
  return obstacle < topo_->triple_edges.size() ? topo_->triple_edges[obstacle] : empty_list;
}

const std::vector<int>& ShellMesh::triple_line_vertices(std::size_t obstacle) const {
  return obstacle < topo_->triple_vertices.size() ? topo_->triple_vertices[obstacle]
                                                  : empty_list;
}

const std::vector<int>& ShellMesh::wetted_vertices(std::size_t obstacle) const {
  return obstacle < topo_->wetted_vertices.size() ? topo_->wetted_vertices[obstacle]
                                                  : empty_list;
}

std::optional<RegionTag> ShellMesh::uniform_region(int v) const {
  const auto& faces = vertex_faces(v);
  if (faces.empty()) return std::nullopt;
  const RegionTag r = region(faces.front());
  for (int f : faces) {
    if (region(f) != r) return std::nullopt;
  }
  return r;
}

double ShellMesh::bounding_box_diagonal() const { return bbox_diagonal(vertices_); }

ShellMesh ShellMesh::with_vertices(std::vector<Vec3> vertices) const {
  if (vertices.size() != vertices_.size()) {
    throw PreconditionError("vertex count mismatch in with_vertices");
  }
  ShellMesh out;
  out.vertices_ = std::move(vertices);
  out.topo_ = topo_;
  out.derive_geometry();
  return out;
}

ShellMesh ShellMesh::displaced(const VertexField& field, double eps) const {
  if (field.size() != vertices_.size()) {
    throw PreconditionError("vertex field size does not match the mesh");
  }
  std::vector<Vec3> moved(vertices_.size());
  for (std::size_t i = 0; i < moved.size(); ++i) moved[i] = vertices_[i] + eps * field[i];
  return with_vertices(std::move(moved));
}

void EnergyParams::validate() const {
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (!(beta[i] > -1.0 && beta[i] < 1.0)) {
      throw ParameterError("beta[" + std::to_string(i) + "] must lie in (-1, 1)");
    }
  }
  if (!(bond >= 0.0)) throw ParameterError("bond number must be >= 0");
  if (std::abs(gravity_dir.norm() - 1.0) > 1e-12) {
    throw ParameterError("gravity direction must be a unit vector");
  }
  if (!(target_volume > 0.0)) throw ParameterError("target volume must be > 0");
  if (!(sigma > 0.0)) throw ParameterError("surface tension scale must be > 0");
}

double beta_from_contact_angle(double degrees) {
  if (!(degrees > 0.0 && degrees < 180.0)) {
    throw ParameterError("contact angle must lie in (0, 180) degrees");
  }
  return std::cos(degrees * std::numbers::pi / 180.0);
}

Vec3 face_normal(const ShellMesh& mesh, int face) { return mesh.normal(face); }

Vec3 vertex_normal(const ShellMesh& mesh, int vertex) {
  const auto& faces = mesh.vertex_faces(vertex);
  if (faces.empty()) {
    throw PreconditionError("vertex " + std::to_string(vertex) + " has no incident face");
  }
  Vec3 sum = Vec3::Zero();
  for (int f : faces) sum += mesh.area(f) * mesh.normal(f);
  const double len = sum.norm();
  double scale = 0.0;
  for (int f : faces) scale += mesh.area(f);
  if (len <= 1e-12 * scale) {
    throw DegenerateGeometryError("vertex normal vanishes at vertex " + std::to_string(vertex));
  }
  return sum / len;
}

VertexField vertex_normals(const ShellMesh& mesh) {
  VertexField out(mesh.num_vertices());
  for (int v = 0; v < static_cast<int>(mesh.num_vertices()); ++v) out[v] = vertex_normal(mesh, v);
  return out;
}

Vec3 edge_conormal(const ShellMesh& mesh, int edge, int face) {
  const auto& e = mesh.edges()[edge];
  const Vec3& a = mesh.vertex(e.vertices[0]);
  const Vec3& b = mesh.vertex(e.vertices[1]);
  const auto& t = mesh.triangle(face);
  int opposite = -1;
  for (int v : t) {
    if (v != e.vertices[0] && v != e.vertices[1]) opposite = v;
  }
  Vec3 u = mesh.normal(face).cross((b - a).normalized());
  if (u.dot(mesh.vertex(opposite) - a) > 0.0) u = -u;
  return u.normalized();
}

Conormals conormals_at_triple_vertex(const ShellMesh& mesh, int vertex, std::size_t obstacle) {
  const RegionTag wet = liquid_solid(obstacle);
  Vec3 mu_la = Vec3::Zero();
  Vec3 mu_ls = Vec3::Zero();
  int count = 0;
  for (int e : mesh.vertex_edges(vertex)) {
    const auto& edge = mesh.edges()[e];
    if (edge.faces[1] < 0) continue;
    int f_la = edge.faces[0];
    int f_ls = edge.faces[1];
    if (mesh.region(f_la) != kLiquidAir) std::swap(f_la, f_ls);
    if (mesh.region(f_la) != kLiquidAir || mesh.region(f_ls) != wet) continue;
    const double len =
        (mesh.vertex(edge.vertices[1]) - mesh.vertex(edge.vertices[0])).norm();
    mu_la += len * edge_conormal(mesh, e, f_la);
    mu_ls += len * edge_conormal(mesh, e, f_ls);
    ++count;
  }
  if (count == 0) {
    throw PreconditionError("vertex " + std::to_string(vertex) +
                            " is not on the triple line of obstacle " +
                            std::to_string(obstacle));
  }
  const double nla = mu_la.norm();
  const double nls = mu_ls.norm();
  if (nla < 1e-14 || nls < 1e-14) {
    throw DegenerateGeometryError("co-normal average vanishes at vertex " +
                                  std::to_string(vertex));
  }
  return {mu_la / nla, mu_ls / nls};
}

double surface_area(const ShellMesh& mesh, RegionFilter filter) {
  double sum = 0.0;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    if (filter.matches(mesh.region(static_cast<int>(f)))) sum += mesh.area(static_cast<int>(f));
  }
  return sum;
}

double enclosed_volume(const ShellMesh& mesh) {
  require_closed(mesh, "enclosed_volume");
  double sum = 0.0;
  for (const auto& t : mesh.triangles()) {
    sum += mesh.vertex(t[0]).dot(mesh.vertex(t[1]).cross(mesh.vertex(t[2])));
  }
  return sum / 6.0;
}

double gravitational_energy(const ShellMesh& mesh, const Vec3& gravity) {
  require_closed(mesh, "gravitational_energy");
  double sum = 0.0;
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    double face = 0.0;
    for (const Vec3& m : edge_midpoints(mesh, f)) {
      const Vec3 g_tilde = 0.5 * gravity.cwiseProduct(m.cwiseProduct(m));
      face += g_tilde.dot(mesh.normal(f));
    }
    sum += mesh.area(f) / 3.0 * face;
  }
  return sum;
}

double gravitational_energy(const ShellMesh& mesh, const EnergyParams& params) {
  return gravitational_energy(mesh, params.gravity_dir);
}

double volume_centroid_component(const ShellMesh& mesh, int axis) {
  require_closed(mesh, "volume_centroid_component");
  if (axis < 0 || axis > 2) throw PreconditionError("centroid axis must be 0, 1 or 2");
  double sum = 0.0;
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    double face = 0.0;
    for (const Vec3& m : edge_midpoints(mesh, f)) face += 0.5 * m[axis] * m[axis];
    sum += mesh.area(f) / 3.0 * face * mesh.normal(f)[axis];
  }
  return sum;
}

MeshQuality mesh_quality(const ShellMesh& mesh) {
  MeshQuality q;
  q.min_angle_deg = 180.0;
  q.min_edge = std::numeric_limits<double>::infinity();
  for (const auto& t : mesh.triangles()) {
    for (int k = 0; k < 3; ++k) {
      const Vec3& p = mesh.vertex(t[k]);
      const Vec3 u = (mesh.vertex(t[(k + 1) % 3]) - p).normalized();
      const Vec3 w = (mesh.vertex(t[(k + 2) % 3]) - p).normalized();
      const double ang = std::acos(std::clamp(u.dot(w), -1.0, 1.0)) * 180.0 / std::numbers::pi;
      q.min_angle_deg = std::min(q.min_angle_deg, ang);
      q.max_angle_deg = std::max(q.max_angle_deg, ang);
    }
  }
  double total = 0.0;
  for (const auto& e : mesh.edges()) {
    const double len = (mesh.vertex(e.vertices[1]) - mesh.vertex(e.vertices[0])).norm();
    q.min_edge = std::min(q.min_edge, len);
    q.max_edge = std::max(q.max_edge, len);
    total += len;
  }
  q.mean_edge = mesh.edges().empty() ? 0.0 : total / static_cast<double>(mesh.edges().size());
  return q;
}

}  // namespace capbridge
