#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "capbridge/types.hpp"

namespace capbridge {

// Region tags: 0 is the liquid-air interface, k >= 1 is the interface wetting
// obstacle k - 1.
using RegionTag = int;
inline constexpr RegionTag kLiquidAir = 0;

constexpr RegionTag liquid_solid(std::size_t obstacle) {
  return static_cast<RegionTag>(obstacle) + 1;
}
constexpr bool is_liquid_solid(RegionTag tag) { return tag > 0; }
constexpr std::size_t obstacle_of(RegionTag tag) {
  return static_cast<std::size_t>(tag - 1);
}

class RegionFilter {
 public:
  static RegionFilter all() { return RegionFilter{}; }
  static RegionFilter liquid_air() { return RegionFilter{kLiquidAir}; }
  static RegionFilter liquid_solid(std::size_t obstacle) {
    return RegionFilter{capbridge::liquid_solid(obstacle)};
  }
  static RegionFilter tag(RegionTag t) { return RegionFilter{t}; }

  bool matches(RegionTag t) const { return !tag_ || *tag_ == t; }

 private:
  RegionFilter() = default;
  explicit RegionFilter(RegionTag t) : tag_(t) {}
  std::optional<RegionTag> tag_;
};

using Triangle = std::array<int, 3>;

/// Undirected edge. `faces[1]` is -1 on the boundary of an open mesh.
struct MeshEdge {
  std::array<int, 2> vertices;
  std::array<int, 2> faces;
};

/// Labeled triangle mesh of the liquid surface.
///
/// Construction validates indices, rejects repeated vertices within a
/// triangle, zero-area triangles (area < 1e-14 * bbox_diagonal^2) and
/// non-manifold edges, and checks that faces sharing an edge traverse it in
/// opposite directions. Open meshes are allowed; functionals that need a
/// closed surface check `is_closed()` themselves.
///
/// Connectivity is shared between copies that only differ in vertex
/// positions, so `with_vertices` is cheap.
class ShellMesh {
 public:
  ShellMesh() = default;
  ShellMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
            std::vector<RegionTag> face_regions);
  /// All faces tagged liquid-air.
  ShellMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_faces() const { return topo_ ? topo_->triangles.size() : 0; }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const Vec3& vertex(int v) const { return vertices_[v]; }
  const std::vector<Triangle>& triangles() const { return topo_->triangles; }
  const Triangle& triangle(int f) const { return topo_->triangles[f]; }
  const std::vector<RegionTag>& face_regions() const { return topo_->regions; }
  RegionTag region(int f) const { return topo_->regions[f]; }

  const Vec3& normal(int f) const { return normals_[f]; }
  double area(int f) const { return areas_[f]; }
  const std::vector<Vec3>& normals() const { return normals_; }
  const std::vector<double>& areas() const { return areas_; }

  const std::vector<int>& vertex_faces(int v) const { return topo_->vertex_faces[v]; }
  const std::vector<int>& vertex_edges(int v) const { return topo_->vertex_edges[v]; }
  const std::vector<MeshEdge>& edges() const { return topo_->edges; }
  /// Edge index of face f opposite to local vertex k.
  int face_edge(int f, int k) const { return topo_->face_edges[f][k]; }

  bool is_closed() const { return topo_ && topo_->closed; }
  /// Largest obstacle count implied by the tags (max tag).
  std::size_t num_obstacle_regions() const { return topo_->max_tag; }

  /// Edges whose two faces are liquid-air and liquid-solid for `obstacle`.
  const std::vector<int>& triple_line_edges(std::size_t obstacle) const;
  /// Vertices on a triple line of `obstacle`, ascending.
  const std::vector<int>& triple_line_vertices(std::size_t obstacle) const;
  /// Vertices incident to at least one face wetting `obstacle`, ascending.
  const std::vector<int>& wetted_vertices(std::size_t obstacle) const;
  /// Region of the vertex if all incident faces share it, nullopt otherwise.
  std::optional<RegionTag> uniform_region(int v) const;
  bool is_triple_vertex(int v) const { return !uniform_region(v).has_value(); }

  double bounding_box_diagonal() const;

  /// Same connectivity, new positions. Throws DegenerateGeometryError when a
  /// face collapses.
  ShellMesh with_vertices(std::vector<Vec3> vertices) const;
  /// Positions s + eps * V.
  ShellMesh displaced(const VertexField& field, double eps) const;

 private:
  struct Topology {
    std::vector<Triangle> triangles;
    std::vector<RegionTag> regions;
    std::vector<std::vector<int>> vertex_faces;
    std::vector<std::vector<int>> vertex_edges;
    std::vector<MeshEdge> edges;
    std::vector<std::array<int, 3>> face_edges;
    std::vector<std::vector<int>> triple_edges;     // per obstacle
    std::vector<std::vector<int>> triple_vertices;  // per obstacle
    std::vector<std::vector<int>> wetted_vertices;  // per obstacle
    std::size_t max_tag = 0;
    bool closed = false;
  };

  static std::shared_ptr<const Topology> build_topology(std::size_t num_vertices,
                                                        std::vector<Triangle> triangles,
                                                        std::vector<RegionTag> regions);
  void derive_geometry();

  std::vector<Vec3> vertices_;
  std::shared_ptr<const Topology> topo_;
  std::vector<Vec3> normals_;
  std::vector<double> areas_;
};

/// Physical parameters of the energy
///   S(LA) - sum_i beta_i S(LS_i) + bond * G,  subject to F = target_volume.
/// `gravity_dir` is the vector g in G = int_Omega <g, x> dx; minimizing
/// bond * G pulls the liquid towards -g.
struct EnergyParams {
  std::vector<double> beta;
  double bond = 0.0;
  Vec3 gravity_dir{0.0, 0.0, 1.0};
  double target_volume = 1.0;
  double sigma = 1.0;

  /// Throws ParameterError when an invariant is violated.
  void validate() const;
};

/// beta = cos(theta) for a contact angle theta in degrees, theta in (0, 180).
double beta_from_contact_angle(double degrees);

// --- geometric primitives --------------------------------------------------

/// Unit outward normal of a face from the cross product of its edges.
Vec3 face_normal(const ShellMesh& mesh, int face);
/// Area-weighted average of incident face normals, normalized.
Vec3 vertex_normal(const ShellMesh& mesh, int vertex);
VertexField vertex_normals(const ShellMesh& mesh);

struct Conormals {
  Vec3 liquid_air;
  Vec3 liquid_solid;
};

/// Outward co-normals of the liquid-air and liquid-solid patches at a vertex
/// of the triple line of `obstacle`. For each incident triple-line edge the
/// in-face perpendicular to the edge is taken on the adjacent face of each
/// side (pointing out of that face), weighted by edge length, summed and
/// normalized.
Conormals conormals_at_triple_vertex(const ShellMesh& mesh, int vertex,
                                     std::size_t obstacle);

/// Outward co-normal of face `face` across its edge `edge`.
Vec3 edge_conormal(const ShellMesh& mesh, int edge, int face);

// --- functionals -----------------------------------------------------------

double surface_area(const ShellMesh& mesh, RegionFilter filter = RegionFilter::all());
/// F = int (1/3) <s, n> ds; requires a closed mesh.
double enclosed_volume(const ShellMesh& mesh);
/// G = int <g~(s), n> ds with g~ = 1/2 (g_i s_i^2); requires a closed mesh.
double gravitational_energy(const ShellMesh& mesh, const Vec3& gravity);
double gravitational_energy(const ShellMesh& mesh, const EnergyParams& params);
/// int <f2, n> ds with f2 = 1/2 s_axis^2 e_axis, i.e. the unnormalized first
/// moment int_Omega x_axis dx. `axis` is 0-based.
double volume_centroid_component(const ShellMesh& mesh, int axis);

// --- generators ------------------------------------------------------------

/// Closed capped cylinder around the x3-axis. Caps are hexagonal ring
/// triangulations; the top cap is tagged as wetting obstacle 0, the bottom cap
/// obstacle 1, the side liquid-air.
ShellMesh generate_cylinder(double radius, double z_min, double z_max,
                            double target_edge_length);
/// Subdivided icosahedron projected to a sphere; all faces liquid-air.
ShellMesh generate_icosphere(double radius, int subdivisions,
                             const Vec3& center = Vec3::Zero());
/// Axis-aligned box surface with `divisions` segments per edge.
ShellMesh generate_box(const Vec3& lo, const Vec3& hi, int divisions);

// --- quality ---------------------------------------------------------------

struct MeshQuality {
  double min_angle_deg = 0.0;
  double max_angle_deg = 0.0;
  double min_edge = 0.0;
  double max_edge = 0.0;
  double mean_edge = 0.0;
};
MeshQuality mesh_quality(const ShellMesh& mesh);

}  // namespace capbridge
