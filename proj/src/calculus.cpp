#include "capbridge/calculus.hpp"

#include <Eigen/Geometry>

#include "capbridge/errors.hpp"

namespace capbridge {

namespace {

struct QuadPoint {
  std::array<double, 3> bary;
  double weight;  // fraction of the face area
};

// Edge midpoints: exact up to degree 2.
const std::vector<QuadPoint> kRuleDegree2 = {
    {{0.5, 0.5, 0.0}, 1.0 / 3.0},
    {{0.0, 0.5, 0.5}, 1.0 / 3.0},
    {{0.5, 0.0, 0.5}, 1.0 / 3.0},
};

// Dunavant, 6 points, exact up to degree 4.
const std::vector<QuadPoint> kRuleDegree4 = {
    {{0.108103018168070, 0.445948490915965, 0.445948490915965}, 0.223381589678011},
    {{0.445948490915965, 0.108103018168070, 0.445948490915965}, 0.223381589678011},
    {{0.445948490915965, 0.445948490915965, 0.108103018168070}, 0.223381589678011},
    {{0.816847572980459, 0.091576213509771, 0.091576213509771}, 0.109951743655322},
    {{0.091576213509771, 0.816847572980459, 0.091576213509771}, 0.109951743655322},
    {{0.091576213509771, 0.091576213509771, 0.816847572980459}, 0.109951743655322},
};

const std::vector<QuadPoint>& rule_for(const IntegrandPair& pair) {
  if (pair.degree <= 2) return kRuleDegree2;
  if (pair.degree <= 4) return kRuleDegree4;
  throw ParameterError("integrand degree above 4 is not supported");
}

void check_field(const ShellMesh& mesh, const VertexField& V) {
  if (V.size() != mesh.num_vertices()) {
    throw PreconditionError("vertex field size does not match the mesh");
  }
}

Vec3 interpolate(const ShellMesh& mesh, int f, const std::array<double, 3>& bary) {
  const auto& t = mesh.triangle(f);
  return bary[0] * mesh.vertex(t[0]) + bary[1] * mesh.vertex(t[1]) + bary[2] * mesh.vertex(t[2]);
}

Vec3 interpolate(const VertexField& V, const Triangle& t, const std::array<double, 3>& bary) {
  return bary[0] * V[t[0]] + bary[1] * V[t[1]] + bary[2] * V[t[2]];
}

Mat3 face_jacobian(const ShellMesh& mesh, int f, const VertexField& V) {
  const auto g = basis_gradients(mesh, f);
  const auto& t = mesh.triangle(f);
  Mat3 D = Mat3::Zero();
  for (int k = 0; k < 3; ++k) D += V[t[k]] * g[k].transpose();
  return D;
}

// d(div V)[W] for constant per-face Jacobians.
double mat_div_face(const Mat3& DV, const Mat3& DW, const Vec3& n) {
  return -(DV * DW).trace() + (DV.transpose() * n).dot(DW.transpose() * n);
}

Vec3 ddn_face(const Mat3& DV, const Mat3& DW, const Vec3& n) {
  const Vec3 pv = DV.transpose() * n;
  const Vec3 pw = DW.transpose() * n;
  return DW.transpose() * pv - pv.dot(pw) * n + DV.transpose() * pw;
}

}  // namespace

IntegrandPair make_pair_F() {
  IntegrandPair p;
  p.f2 = [](const Vec3& s) -> Vec3 { return s / 3.0; };
  p.jacobian = [](const Vec3&) -> Mat3 { return Mat3::Identity() / 3.0; };
  p.second = [](const Vec3&, const Vec3&, const Vec3&) -> Vec3 { return Vec3::Zero(); };
  p.degree = 1;
  return p;
}

IntegrandPair make_pair_G(const Vec3& gravity) {
  IntegrandPair p;
  p.f2 = [gravity](const Vec3& s) -> Vec3 {
    return 0.5 * gravity.cwiseProduct(s.cwiseProduct(s));
  };
  p.jacobian = [gravity](const Vec3& s) -> Mat3 {
    return gravity.cwiseProduct(s).asDiagonal();
  };
  p.second = [gravity](const Vec3&, const Vec3& v, const Vec3& w) -> Vec3 {
    return gravity.cwiseProduct(v.cwiseProduct(w));
  };
  p.degree = 2;
  return p;
}

IntegrandPair make_pair_G(const EnergyParams& params) { return make_pair_G(params.gravity_dir); }

IntegrandPair make_pair_centroid(int axis) {
  if (axis < 0 || axis > 2) throw PreconditionError("centroid axis must be 0, 1 or 2");
  IntegrandPair p;
  p.f2 = [axis](const Vec3& s) -> Vec3 {
    Vec3 out = Vec3::Zero();
    out[axis] = 0.5 * s[axis] * s[axis];
    return out;
  };
  p.jacobian = [axis](const Vec3& s) -> Mat3 {
    Mat3 m = Mat3::Zero();
    m(axis, axis) = s[axis];
    return m;
  };
  p.second = [axis](const Vec3&, const Vec3& v, const Vec3& w) -> Vec3 {
    Vec3 out = Vec3::Zero();
    out[axis] = v[axis] * w[axis];
    return out;
  };
  p.degree = 2;
  return p;
}

std::array<Vec3, 3> basis_gradients(const ShellMesh& mesh, int face) {
  const auto& t = mesh.triangle(face);
  const Vec3& n = mesh.normal(face);
  const double inv = 1.0 / (2.0 * mesh.area(face));
  std::array<Vec3, 3> g;
  for (int k = 0; k < 3; ++k) {
    const Vec3& b = mesh.vertex(t[(k + 1) % 3]);
    const Vec3& c = mesh.vertex(t[(k + 2) % 3]);
    g[k] = n.cross(c - b) * inv;
  }
  return g;
}

FaceJacobian tangential_jacobian(const ShellMesh& mesh, const VertexField& V) {
  check_field(mesh, V);
  FaceJacobian out(mesh.num_faces());
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) out[f] = face_jacobian(mesh, f, V);
  return out;
}

FaceVectors dn(const ShellMesh& mesh, const VertexField& V) {
  check_field(mesh, V);
  FaceVectors out(mesh.num_faces());
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    out[f] = -(face_jacobian(mesh, f, V).transpose() * mesh.normal(f));
  }
  return out;
}

FaceVectors ddn(const ShellMesh& mesh, const VertexField& V, const VertexField& W) {
  check_field(mesh, V);
  check_field(mesh, W);
  FaceVectors out(mesh.num_faces());
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    out[f] = ddn_face(face_jacobian(mesh, f, V), face_jacobian(mesh, f, W), mesh.normal(f));
  }
  return out;
}

ScalarField mat_div(const ShellMesh& mesh, const VertexField& V, const VertexField& W) {
  check_field(mesh, V);
  check_field(mesh, W);
  ScalarField out(mesh.num_faces());
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    out[f] = mat_div_face(face_jacobian(mesh, f, V), face_jacobian(mesh, f, W), mesh.normal(f));
  }
  return out;
}

double dS(const ShellMesh& mesh, RegionFilter filter, const VertexField& V) {
  check_field(mesh, V);
  double sum = 0.0;
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    if (!filter.matches(mesh.region(f))) continue;
    sum += mesh.area(f) * face_jacobian(mesh, f, V).trace();
  }
  return sum;
}

double d2S(const ShellMesh& mesh, RegionFilter filter, const VertexField& V,
           const VertexField& W) {
  check_field(mesh, V);
  check_field(mesh, W);
  double sum = 0.0;
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    if (!filter.matches(mesh.region(f))) continue;
    const Mat3 DV = face_jacobian(mesh, f, V);
    const Mat3 DW = face_jacobian(mesh, f, W);
    sum += mesh.area(f) * (DV.trace() * DW.trace() + mat_div_face(DV, DW, mesh.normal(f)));
  }
  return sum;
}

double J2(const ShellMesh& mesh, const IntegrandPair& pair) {
  const auto& rule = rule_for(pair);
  double sum = 0.0;
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    double face = 0.0;
    for (const auto& q : rule) face += q.weight * pair.f2(interpolate(mesh, f, q.bary)).dot(mesh.normal(f));
    sum += mesh.area(f) * face;
  }
  return sum;
}

double dJ2(const ShellMesh& mesh, const IntegrandPair& pair, const VertexField& V) {
  check_field(mesh, V);
  const auto& rule = rule_for(pair);
  double sum = 0.0;
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    const Vec3& n = mesh.normal(f);
    const Mat3 D = face_jacobian(mesh, f, V);
    const double div = D.trace();
    const Vec3 dnv = -(D.transpose() * n);
    double face = 0.0;
    for (const auto& q : rule) {
      const Vec3 s = interpolate(mesh, f, q.bary);
      const Vec3 v = interpolate(V, mesh.triangle(f), q.bary);
      const Vec3 f2 = pair.f2(s);
      face += q.weight * (f2.dot(n) * div + pair.df2(s, v).dot(n) + f2.dot(dnv));
    }
    sum += mesh.area(f) * face;
  }
  return sum;
}

double d2J2(const ShellMesh& mesh, const IntegrandPair& pair, const VertexField& V,
            const VertexField& W) {
  check_field(mesh, V);
  check_field(mesh, W);
  const auto& rule = rule_for(pair);
  double sum = 0.0;
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    const Vec3& n = mesh.normal(f);
    const auto& tri = mesh.triangle(f);
    const Mat3 DV = face_jacobian(mesh, f, V);
    const Mat3 DW = face_jacobian(mesh, f, W);
    const double div_v = DV.trace();
    const double div_w = DW.trace();
    const double md = mat_div_face(DV, DW, n);
    const Vec3 dn_v = -(DV.transpose() * n);
    const Vec3 dn_w = -(DW.transpose() * n);
    const Vec3 d2n = ddn_face(DV, DW, n);
    double face = 0.0;
    for (const auto& q : rule) {
      const Vec3 s = interpolate(mesh, f, q.bary);
      const Vec3 v = interpolate(V, tri, q.bary);
      const Vec3 w = interpolate(W, tri, q.bary);
      const Vec3 f2 = pair.f2(s);
      const Vec3 df_v = pair.df2(s, v);
      const Vec3 df_w = pair.df2(s, w);
      const double fn = f2.dot(n);
      double value = fn * div_v * div_w + fn * md;
      value += (df_v.dot(n) + f2.dot(dn_v)) * div_w;
      value += (df_w.dot(n) + f2.dot(dn_w)) * div_v;
      value += df_v.dot(dn_w) + df_w.dot(dn_v);
      value += pair.d2f2(s, v, w).dot(n) + f2.dot(d2n);
      face += q.weight * value;
    }
    sum += mesh.area(f) * face;
  }
  return sum;
}

double ddist(const ObstacleField& field, const Vec3& s, const Vec3& v) {
  return field.grad(s).dot(v);
}

double d2dist(const ObstacleField& field, const Vec3& s, const Vec3& v, const Vec3& w) {
  return v.dot(field.hess(s) * w);
}

ElementDerivatives area_element(const ShellMesh& mesh, int face) {
  ElementDerivatives out;
  const double A = mesh.area(face);
  const Vec3& n = mesh.normal(face);
  const auto g = basis_gradients(mesh, face);
  const Mat3 nn = n * n.transpose();
  out.value = A;
  for (int k = 0; k < 3; ++k) {
    out.grad.segment<3>(3 * k) = A * g[k];
    for (int l = 0; l < 3; ++l) {
      out.hess.block<3, 3>(3 * k, 3 * l) =
          A * (g[k] * g[l].transpose() - g[l] * g[k].transpose() + g[k].dot(g[l]) * nn);
    }
  }
  return out;
}

ElementDerivatives j2_element(const ShellMesh& mesh, int face, const IntegrandPair& pair) {
  ElementDerivatives out;
  const double A = mesh.area(face);
  const Vec3& n = mesh.normal(face);
  const auto g = basis_gradients(mesh, face);
  for (const auto& q : rule_for(pair)) {
    const double w = q.weight * A;
    const Vec3 s = interpolate(mesh, face, q.bary);
    const Vec3 f = pair.f2(s);
    const Mat3 M = pair.jacobian(s);
    const double fn = f.dot(n);
    Mat3 N2;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) N2(a, b) = pair.second(s, Vec3::Unit(a), Vec3::Unit(b)).dot(n);
    }
    const Vec3 Mtn = M.transpose() * n;
    std::array<Vec3, 3> a_k;
    for (int k = 0; k < 3; ++k) a_k[k] = q.bary[k] * Mtn - g[k].dot(f) * n;

    out.value += w * fn;
    for (int k = 0; k < 3; ++k) {
      out.grad.segment<3>(3 * k) += w * (fn * g[k] + a_k[k]);
      for (int l = 0; l < 3; ++l) {
        const double pk = q.bary[k];
        const double pl = q.bary[l];
        // The +fn (g_k.g_l) nn^T of the normal-projection term cancels with
        // the -fn <pV, pW> n part of the second normal derivative.
        Mat3 B = fn * (g[k] * g[l].transpose() - g[l] * g[k].transpose());
        B += a_k[k] * g[l].transpose() + g[k] * a_k[l].transpose();
        B -= pk * (M.transpose() * g[l]) * n.transpose();
        B -= pl * n * (g[k].transpose() * M);
        B += pk * pl * N2;
        B += f.dot(g[l]) * n * g[k].transpose() + f.dot(g[k]) * g[l] * n.transpose();
        out.hess.block<3, 3>(3 * k, 3 * l) += w * B;
      }
    }
  }
  return out;
}

}  // namespace capbridge
