#pragma once

#include <cstddef>

#include "capbridge/mesh.hpp"

namespace capbridge {

struct ObstacleForces {
  Vec3 pressure = Vec3::Zero();
  Vec3 tension = Vec3::Zero();
  Vec3 total = Vec3::Zero();
};

/// F_p = lambda_vol sum_{LS_i} area n, F_s = sum over triple-line edges of
/// length times the liquid-air co-normal; both scaled by sigma.
ObstacleForces obstacle_forces(const ShellMesh& mesh, double lambda_vol, std::size_t obstacle,
                               double sigma = 1.0);

/// 2 pi sigma R [sin psi sin(theta1 + psi) - HR sin^2 psi], angles in radians.
double orr_reference_force(double R, double sigma, double psi, double theta1, double HR);

struct ContactAngleStats {
  std::size_t count = 0;
  double mean_abs_error = 0.0;
  double max_abs_error = 0.0;
  /// Mean of <mu_LS, mu_LA>, i.e. the discrete cos(theta).
  double mean_cosine = 0.0;
};

/// |<mu_LS, mu_LA> - beta| over the triple-line vertices of `obstacle`.
ContactAngleStats contact_angle_error(const ShellMesh& mesh, std::size_t obstacle, double beta);

}  // namespace capbridge
