#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace capbridge {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Piecewise-linear nodal field: one entry per mesh vertex.
using VertexField = std::vector<Vec3>;
using ScalarField = std::vector<double>;

}  // namespace capbridge
