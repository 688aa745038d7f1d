#pragma once

#include <array>
#include <functional>

#include <Eigen/Core>

#include "capbridge/distance.hpp"
#include "capbridge/mesh.hpp"

namespace capbridge {

/// Per-face tangential Jacobian D_G V of a piecewise-linear field.
using FaceJacobian = std::vector<Mat3>;
/// One vector per face.
using FaceVectors = std::vector<Vec3>;

/// Integrand of a functional J(G) = int <f2(s), n> ds together with its
/// material derivatives along perturbation fields:
///   df2[V](s)      = jacobian(s) * V(s)
///   d2f2[V, W](s)  = second(s, V(s), W(s))   (bilinear)
/// `degree` is the polynomial degree of f2 in s; it selects the quadrature.
struct IntegrandPair {
  std::function<Vec3(const Vec3&)> f2;
  std::function<Mat3(const Vec3&)> jacobian;
  std::function<Vec3(const Vec3&, const Vec3&, const Vec3&)> second;
  int degree = 1;

  Vec3 df2(const Vec3& s, const Vec3& v) const { return jacobian(s) * v; }
  Vec3 d2f2(const Vec3& s, const Vec3& v, const Vec3& w) const { return second(s, v, w); }
};

/// Volume: f2 = s / 3.
IntegrandPair make_pair_F();
/// Gravity: f2 = 1/2 (g_i s_i^2).
IntegrandPair make_pair_G(const Vec3& gravity);
IntegrandPair make_pair_G(const EnergyParams& params);
/// First volume moment along `axis` (0-based): f2 = 1/2 s_axis^2 e_axis.
IntegrandPair make_pair_centroid(int axis);

/// Gradients of the three barycentric hat functions on face f (tangential,
/// constant per face).
std::array<Vec3, 3> basis_gradients(const ShellMesh& mesh, int face);

FaceJacobian tangential_jacobian(const ShellMesh& mesh, const VertexField& V);

/// dn[V] = -(D_G V)^T n per face.
FaceVectors dn(const ShellMesh& mesh, const VertexField& V);
/// Second material derivative of the normal under dV[W] = 0.
FaceVectors ddn(const ShellMesh& mesh, const VertexField& V, const VertexField& W);
/// d(div_G V)[W] = -tr(D_G V D_G W) + <(D_G V)^T n, (D_G W)^T n> per face.
ScalarField mat_div(const ShellMesh& mesh, const VertexField& V, const VertexField& W);

/// dS[V] = int div_G V ds over the faces matched by `filter`.
double dS(const ShellMesh& mesh, RegionFilter filter, const VertexField& V);
double d2S(const ShellMesh& mesh, RegionFilter filter, const VertexField& V,
           const VertexField& W);

/// J2 = int <f2, n> ds with the quadrature chosen by the pair's degree.
double J2(const ShellMesh& mesh, const IntegrandPair& pair);
double dJ2(const ShellMesh& mesh, const IntegrandPair& pair, const VertexField& V);
double d2J2(const ShellMesh& mesh, const IntegrandPair& pair, const VertexField& V,
            const VertexField& W);

/// Material derivative of a shape-independent distance: <grad dist(s), V(s)>.
double ddist(const ObstacleField& field, const Vec3& s, const Vec3& v);
/// V^T H(s) W.
double d2dist(const ObstacleField& field, const Vec3& s, const Vec3& v, const Vec3& w);

/// Per-face derivatives with respect to the nine vertex coordinates
/// (vertex-major: x0 y0 z0 x1 ...), used by the assembly. For an untransported
/// nodal field V with values v_k, dJ[V] = grad . v and d2J[V,W] = v^T hess w.
struct ElementDerivatives {
  double value = 0.0;
  Eigen::Matrix<double, 9, 1> grad = Eigen::Matrix<double, 9, 1>::Zero();
  Eigen::Matrix<double, 9, 9> hess = Eigen::Matrix<double, 9, 9>::Zero();
};

ElementDerivatives area_element(const ShellMesh& mesh, int face);
ElementDerivatives j2_element(const ShellMesh& mesh, int face, const IntegrandPair& pair);

}  // namespace capbridge
