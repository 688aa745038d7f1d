#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "capbridge/types.hpp"

namespace capbridge {

/// Regular scalar grid in x-fastest order.
struct LevelSetGrid {
  std::array<int, 3> dims{0, 0, 0};
  Vec3 origin = Vec3::Zero();
  double spacing = 0.0;
  std::vector<double> values;

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * k);
  }
  Vec3 node(int i, int j, int k) const { return origin + spacing * Vec3(i, j, k); }
};

/// Reads `levelset <nx> <ny> <nz> <ox> <oy> <oz> <h>` followed by nx*ny*nz
/// values in x-fastest order.
LevelSetGrid read_levelset_grid(const std::filesystem::path& path);
void write_levelset_grid(const std::filesystem::path& path, const LevelSetGrid& grid);

/// Signed distance to a solid body, negative inside the solid, with spatial
/// gradient and Hessian. Immutable; cheap to copy.
class ObstacleField {
 public:
  enum class Kind { sphere, plane, grid };

  struct Sample {
    double dist;
    Vec3 grad;
    Mat3 hess;
  };

  Kind kind() const;
  std::string describe() const;

  double dist(const Vec3& x) const { return eval(x).dist; }
  Vec3 grad(const Vec3& x) const { return eval(x).grad; }
  Mat3 hess(const Vec3& x) const { return eval(x).hess; }
  /// Throws OutOfDomainError at the sphere centre or outside a grid.
  Sample eval(const Vec3& x) const;

  /// Grid fields only: number of nodes where | |grad| - 1 | > 0.1.
  std::size_t eikonal_violations() const;

 private:
  struct Sphere {
    Vec3 center;
    double radius;
  };
  struct Plane {
    Vec3 normal;
    double offset;
  };
  struct Grid;

  using Impl = std::variant<Sphere, Plane, std::shared_ptr<const Grid>>;
  explicit ObstacleField(Impl impl) : impl_(std::move(impl)) {}

  friend ObstacleField sphere_field(const Vec3& center, double radius);
  friend ObstacleField plane_field(double offset, const Vec3& normal);
  friend ObstacleField grid_field(LevelSetGrid grid);

  Impl impl_;
};

/// dist(x) = |x - c| - R.
ObstacleField sphere_field(const Vec3& center, double radius);
/// dist(x) = <normal, x> + offset; the solid occupies dist < 0.
ObstacleField plane_field(double offset, const Vec3& normal = Vec3::UnitZ());
/// Trilinear interpolation of the samples and of precomputed central-difference
/// gradient and Hessian grids. Queries outside the grid throw.
ObstacleField grid_field(LevelSetGrid grid);

/// Samples an analytic field on a grid, e.g. to feed grid_field in tests.
LevelSetGrid sample_field(const ObstacleField& field, const Vec3& origin, double spacing,
                          const std::array<int, 3>& dims);

}  // namespace capbridge
