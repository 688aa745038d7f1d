#include "capbridge/forces.hpp"

#include <algorithm>
#include <cmath>

#include "capbridge/errors.hpp"

namespace capbridge {

ObstacleForces obstacle_forces(const ShellMesh& mesh, double lambda_vol, std::size_t obstacle,
                               double sigma) {
  const RegionTag tag = liquid_solid(obstacle);
  ObstacleForces out;
  bool wetted = false;
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    if (mesh.region(f) != tag) continue;
    wetted = true;
    out.pressure += mesh.area(f) * mesh.normal(f);
  }
  if (!wetted) {
    throw PreconditionError("obstacle " + std::to_string(obstacle) + " has no wetted faces");
  }
  out.pressure *= lambda_vol * sigma;

  for (int e : mesh.triple_line_edges(obstacle)) {
    const auto& edge = mesh.edges()[e];
    const int la = mesh.region(edge.faces[0]) == kLiquidAir ? edge.faces[0] : edge.faces[1];
    const double len = (mesh.vertex(edge.vertices[0]) - mesh.vertex(edge.vertices[1])).norm();
    out.tension += len * edge_conormal(mesh, e, la);
  }
  out.tension *= sigma;
  out.total = out.pressure + out.tension;
  return out;
}

double orr_reference_force(double R, double sigma, double psi, double theta1, double HR) {
  const double s = std::sin(psi);
  return 2.0 * M_PI * sigma * R * (s * std::sin(theta1 + psi) - HR * s * s);
}

ContactAngleStats contact_angle_error(const ShellMesh& mesh, std::size_t obstacle, double beta) {
  ContactAngleStats st;
  for (int v : mesh.triple_line_vertices(obstacle)) {
    const auto mu = conormals_at_triple_vertex(mesh, v, obstacle);
    const double c = mu.liquid_solid.dot(mu.liquid_air);
    const double err = std::abs(c - beta);
    st.mean_abs_error += err;
    st.max_abs_error = std::max(st.max_abs_error, err);
    st.mean_cosine += c;
    ++st.count;
  }
  if (st.count > 0) {
    st.mean_abs_error /= static_cast<double>(st.count);
    st.mean_cosine /= static_cast<double>(st.count);
  }
  return st;
}

}  // namespace capbridge
