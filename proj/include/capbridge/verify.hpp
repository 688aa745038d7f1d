#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "capbridge/mesh.hpp"

namespace capbridge {

/// 1e-2, 3e-3, 1e-3, ..., 1e-7.
inline std::vector<double> default_eps_sweep() {
  std::vector<double> out;
  for (double e = 1e-2; e > 0.5e-7; e /= 10.0) {
    out.push_back(e);
    if (e > 2e-7) out.push_back(0.3 * e);
  }
  return out;
}

struct FdResult {
  double value = 0.0;
  double eps = 0.0;
  /// (eps, central difference) per sweep entry.
  std::vector<std::pair<double, double>> curve;
  /// |value - reference| per sweep entry when a reference was given.
  std::vector<double> error;
};

/// Central differences (J(G + eps V) - J(G - eps V)) / 2 eps over the sweep.
/// With a reference the entry of least error is picked; without one, the
/// entry where consecutive differences change least (the plateau). Vertex
/// fields are attached to the reference vertices, not transported.
template <class Functional>
FdResult fd_gradient(Functional&& J, const ShellMesh& mesh, const VertexField& V,
                     const std::vector<double>& eps_sweep = default_eps_sweep(),
                     std::optional<double> reference = std::nullopt) {
  FdResult r;
  for (double e : eps_sweep) {
    const double d = (J(mesh.displaced(V, e)) - J(mesh.displaced(V, -e))) / (2.0 * e);
    r.curve.emplace_back(e, d);
  }
  if (r.curve.empty()) return r;
  std::size_t best = 0;
  if (reference) {
    double err_best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < r.curve.size(); ++k) {
      const double err = std::abs(r.curve[k].second - *reference);
      r.error.push_back(err);
      if (err < err_best) {
        err_best = err;
        best = k;
      }
    }
  } else if (r.curve.size() > 1) {
    double jump_best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < r.curve.size(); ++k) {
      const double jump = std::abs(r.curve[k + 1].second - r.curve[k].second);
      if (jump < jump_best) {
        jump_best = jump;
        best = k + 1;
      }
    }
  }
  r.eps = r.curve[best].first;
  r.value = r.curve[best].second;
  return r;
}

/// Positions s + a V + b W.
inline ShellMesh displaced2(const ShellMesh& mesh, const VertexField& V, double a,
                            const VertexField& W, double b) {
  std::vector<Vec3> p = mesh.vertices();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] += a * V[i] + b * W[i];
  return mesh.with_vertices(std::move(p));
}

/// [J(+e,+d) - J(+e,-d) - J(-e,+d) + J(-e,-d)] / (4 e d) with V and W held
/// at the reference vertices (dV[W] = 0).
template <class Functional>
double fd_hessian(Functional&& J, const ShellMesh& mesh, const VertexField& V,
                  const VertexField& W, double eps, double delta = 0.0) {
  if (delta == 0.0) delta = eps;
  const double pp = J(displaced2(mesh, V, eps, W, delta));
  const double pm = J(displaced2(mesh, V, eps, W, -delta));
  const double mp = J(displaced2(mesh, V, -eps, W, delta));
  const double mm = J(displaced2(mesh, V, -eps, W, -delta));
  return (pp - pm - mp + mm) / (4.0 * eps * delta);
}

/// One line of the derivative oracle suite.
struct OracleCheck {
  std::string name;
  int samples = 0;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed() const { return max_rel_error <= tolerance; }
};

/// Assembled and formula derivatives of S, F, G, centroid, distance rows and
/// the full Lagrangian against the FD oracles on small perturbed meshes,
/// `fields` random fields per functional.
std::vector<OracleCheck> run_derivative_oracles(unsigned seed = 7, int fields = 20);
/// Translation / rotation / scaling identities.
std::vector<OracleCheck> run_identity_checks(unsigned seed = 11);

}  // namespace capbridge
