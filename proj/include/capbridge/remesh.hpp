#pragma once

#include <cstddef>
#include <span>

#include "capbridge/distance.hpp"
#include "capbridge/mesh.hpp"

namespace capbridge {

struct RemeshParams {
  double target_edge_length = 0.0;
  /// When > 0, overrides target_edge_length with the length giving roughly
  /// this many triangles on the mesh being remeshed.
  std::size_t target_cells = 0;
  int iterations = 8;
  /// Keep triple lines as feature polylines (vertices slide along them only).
  bool preserve_triple_lines = true;
  /// Relaxation factor of the tangential smoothing pass.
  double smoothing = 0.5;

  bool enabled() const { return target_edge_length > 0.0 || target_cells > 0; }
  void validate() const;
};

/// Isotropic remeshing: split edges longer than 4/3 of the target, collapse
/// edges shorter than 4/5, flip towards valence 6, smooth tangentially.
/// Region tags are inherited from parent faces, wetted vertices are projected
/// back onto their obstacle, and triple-line vertices move only along the
/// line. `obstacles[k]` is the body wetted by faces tagged k + 1.
ShellMesh remesh(const ShellMesh& mesh, const RemeshParams& params,
                 std::span<const ObstacleField> obstacles);

/// Newton projection x <- x - dist(x) grad(x) / |grad(x)|^2 until
/// |dist| <= 1e-10; throws NumericalFailure after 50 iterations.
Vec3 project_to_obstacle(const Vec3& point, const ObstacleField& field);

/// Edge length of an equilateral triangulation of the mesh's area with
/// `cells` triangles.
double edge_length_for_cell_count(const ShellMesh& mesh, std::size_t cells);

}  // namespace capbridge
