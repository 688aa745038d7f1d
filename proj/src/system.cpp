#include "capbridge/system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/SparseLU>

#include "capbridge/calculus.hpp"

namespace capbridge {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using Vec9 = Eigen::Matrix<double, 9, 1>;

// Obstacle whose triple line passes through each vertex, -1 elsewhere.
std::vector<int> triple_owner(const ShellMesh& mesh) {
  std::vector<int> owner(mesh.num_vertices(), -1);
  for (std::size_t i = 0; i < mesh.num_obstacle_regions(); ++i) {
    for (int v : mesh.triple_line_vertices(i)) {
      if (owner[v] >= 0) {
        throw DegenerateGeometryError("vertex " + std::to_string(v) +
                                      " lies on two triple lines");
      }
      owner[v] = static_cast<int>(i);
    }
  }
  return owner;
}

struct Lagrangian {
  VertexField grad_L;
  VertexField grad_F;
  std::vector<VertexField> grad_C;  // already divided by V0
  double volume = 0.0;
  std::vector<double> centroid;  // C / V0
  std::vector<double> dist;
  std::vector<Vec3> dist_grad;
  Triplets hess;  // shape block in basis coordinates (exact mode only)
};

void project_block(const MotionBasis& basis, int vk, int vl, const Mat3& B, Triplets& out) {
  for (int a = basis.first_dof(vk); a < basis.first_dof(vk + 1); ++a) {
    const Vec3 Bu = B.transpose() * basis.direction(a);
    for (int b = basis.first_dof(vl); b < basis.first_dof(vl + 1); ++b) {
      out.emplace_back(a, b, Bu.dot(basis.direction(b)));
    }
  }
}

Lagrangian evaluate(const ShellMesh& mesh, const Problem& problem, const Multipliers& mult,
                    const MotionBasis& basis, const KKTLayout& layout, bool hessian) {
  const auto& params = problem.params;
  const double V0 = params.target_volume;
  const std::size_t nv = mesh.num_vertices();
  const std::size_t nc = problem.centroid.size();

  Lagrangian out;
  out.grad_L.assign(nv, Vec3::Zero());
  out.grad_F.assign(nv, Vec3::Zero());
  out.grad_C.assign(nc, VertexField(nv, Vec3::Zero()));
  out.centroid.assign(nc, 0.0);

  const IntegrandPair pF = make_pair_F();
  const IntegrandPair pG = make_pair_G(params);
  std::vector<IntegrandPair> pC;
  for (const auto& c : problem.centroid) pC.push_back(make_pair_centroid(c.axis));
  std::vector<double> lc(nc, 0.0);
  for (std::size_t c = 0; c < nc && c < mult.centroid.size(); ++c) lc[c] = mult.centroid[c];

  if (hessian) out.hess.reserve(mesh.num_faces() * 9 * 2);

  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    const RegionTag r = mesh.region(f);
    const double cs = r == kLiquidAir ? 1.0 : -params.beta[obstacle_of(r)];
    const auto eA = area_element(mesh, f);
    const auto eF = j2_element(mesh, f, pF);

    Vec9 g = cs * eA.grad + mult.volume * eF.grad;
    Mat9 H;
    if (hessian) H = cs * eA.hess + mult.volume * eF.hess;
    if (params.bond != 0.0) {
      const auto eG = j2_element(mesh, f, pG);
      g += params.bond * eG.grad;
      if (hessian) H += params.bond * eG.hess;
    }
    out.volume += eF.value;

    const auto& t = mesh.triangle(f);
    for (std::size_t c = 0; c < nc; ++c) {
      const auto eC = j2_element(mesh, f, pC[c]);
      out.centroid[c] += eC.value / V0;
      g += (lc[c] / V0) * eC.grad;
      if (hessian) H += (lc[c] / V0) * eC.hess;
      for (int k = 0; k < 3; ++k) out.grad_C[c][t[k]] += eC.grad.segment<3>(3 * k) / V0;
    }
    for (int k = 0; k < 3; ++k) {
      out.grad_L[t[k]] += g.segment<3>(3 * k);
      out.grad_F[t[k]] += eF.grad.segment<3>(3 * k);
    }
    if (hessian) {
      for (int k = 0; k < 3; ++k) {
        for (int l = 0; l < 3; ++l) project_block(basis, t[k], t[l], H.block<3, 3>(3 * k, 3 * l), out.hess);
      }
    }
  }

  const std::size_t nd = layout.dist_vertex.size();
  out.dist.resize(nd);
  out.dist_grad.resize(nd);
  for (std::size_t j = 0; j < nd; ++j) {
    const int v = layout.dist_vertex[j];
    const auto s = problem.obstacles[layout.dist_obstacle[j]].eval(mesh.vertex(v));
    const double lam = mult.distance_at(v);
    out.dist[j] = s.dist;
    out.dist_grad[j] = s.grad;
    out.grad_L[v] += lam * s.grad;
    if (hessian && lam != 0.0) project_block(basis, v, v, lam * s.hess, out.hess);
  }
  return out;
}

Eigen::VectorXd residual_from(const Lagrangian& lag, const Problem& problem,
                              const MotionBasis& basis, const KKTLayout& layout) {
  Eigen::VectorXd r(layout.size);
  r.head(layout.shape) = basis.restrict(lag.grad_L);
  r[layout.volume] = lag.volume - problem.params.target_volume;
  for (std::size_t j = 0; j < lag.dist.size(); ++j) r[layout.dist_begin + j] = lag.dist[j];
  for (std::size_t c = 0; c < layout.num_centroid; ++c) {
    r[layout.centroid_begin + c] = lag.centroid[c] - problem.centroid[c].target;
  }
  return r;
}

void add_symmetric(Triplets& t, std::size_t row, int col, double value) {
  if (value == 0.0) return;
  t.emplace_back(static_cast<int>(row), col, value);
  t.emplace_back(col, static_cast<int>(row), value);
}

KernelHint guess_kernel(const Problem& problem, const MotionBasis& basis, HessianMode mode) {
  if (problem.centroid.empty() && !problem.obstacles.empty()) {
    bool planes = true;
    for (const auto& o : problem.obstacles) planes = planes && o.kind() == ObstacleField::Kind::plane;
    if (planes) return KernelHint::translation;
  }
  if (mode == HessianMode::exact && basis.is_full()) return KernelHint::tangential_motion;
  return KernelHint::none;
}

std::vector<double> min_incident_edge(const ShellMesh& mesh) {
  std::vector<double> out(mesh.num_vertices(), std::numeric_limits<double>::infinity());
  for (const auto& e : mesh.edges()) {
    const double len = (mesh.vertex(e.vertices[0]) - mesh.vertex(e.vertices[1])).norm();
    out[e.vertices[0]] = std::min(out[e.vertices[0]], len);
    out[e.vertices[1]] = std::min(out[e.vertices[1]], len);
  }
  return out;
}

}  // namespace

void Problem::validate(const ShellMesh& mesh) const {
  params.validate();
  if (obstacles.empty()) throw ParameterError("at least one obstacle is required");
  if (params.beta.size() != obstacles.size()) {
    throw ParameterError("one adhesion coefficient per obstacle is required");
  }
  if (mesh.num_obstacle_regions() > obstacles.size()) {
    throw PreconditionError("mesh tags name an obstacle that is not defined");
  }
  for (const auto& c : centroid) {
    if (c.axis < 0 || c.axis > 2) throw ParameterError("centroid axis must be 0, 1 or 2");
  }
}

// --- motion basis ----------------------------------------------------------

MotionBasis MotionBasis::reduced(const ShellMesh& mesh) {
  const auto owner = triple_owner(mesh);
  MotionBasis b;
  b.first_.reserve(mesh.num_vertices() + 1);
  b.first_.push_back(0);
  for (int v = 0; v < static_cast<int>(mesh.num_vertices()); ++v) {
    if (owner[v] >= 0) {
      const auto mu = conormals_at_triple_vertex(mesh, v, static_cast<std::size_t>(owner[v]));
      if (std::abs(mu.liquid_air.dot(mu.liquid_solid)) > 1.0 - 1e-8) {
        throw DegenerateGeometryError("degenerate contact at vertex " + std::to_string(v) +
                                      ": co-normals are parallel");
      }
      b.directions_.push_back(mu.liquid_air);
      b.directions_.push_back(mu.liquid_solid);
      b.owner_.insert(b.owner_.end(), 2, v);
    } else {
      if (!mesh.uniform_region(v)) {
        throw DegenerateGeometryError("vertex " + std::to_string(v) +
                                      " joins two solid regions without a liquid-air face");
      }
      b.directions_.push_back(vertex_normal(mesh, v));
      b.owner_.push_back(v);
    }
    b.first_.push_back(static_cast<int>(b.directions_.size()));
  }
  return b;
}

MotionBasis MotionBasis::full(const ShellMesh& mesh) {
  MotionBasis b;
  b.full_ = true;
  const int nv = static_cast<int>(mesh.num_vertices());
  b.first_.resize(nv + 1);
  b.directions_.reserve(3 * nv);
  b.owner_.reserve(3 * nv);
  for (int v = 0; v < nv; ++v) {
    b.first_[v] = 3 * v;
    for (int a = 0; a < 3; ++a) {
      b.directions_.push_back(Vec3::Unit(a));
      b.owner_.push_back(v);
    }
  }
  b.first_[nv] = 3 * nv;
  return b;
}

VertexField MotionBasis::prolong(const Eigen::VectorXd& coeffs) const {
  if (static_cast<std::size_t>(coeffs.size()) != dim()) {
    throw PreconditionError("coefficient vector does not match the basis");
  }
  VertexField out(num_vertices(), Vec3::Zero());
  for (std::size_t a = 0; a < dim(); ++a) out[owner_[a]] += coeffs[a] * directions_[a];
  return out;
}

Eigen::VectorXd MotionBasis::restrict(const VertexField& covector) const {
  if (covector.size() != num_vertices()) {
    throw PreconditionError("vertex field does not match the basis");
  }
  Eigen::VectorXd out(dim());
  for (std::size_t a = 0; a < dim(); ++a) out[a] = directions_[a].dot(covector[owner_[a]]);
  return out;
}

MotionBasis build_motion_basis(const ShellMesh& mesh) { return MotionBasis::reduced(mesh); }

// --- KKT -------------------------------------------------------------------

KKTLayout make_layout(const ShellMesh& mesh, const MotionBasis& basis, const Problem& problem) {
  if (basis.num_vertices() != mesh.num_vertices()) {
    throw PreconditionError("motion basis was built for a different mesh");
  }
  KKTLayout L;
  L.shape = basis.dim();
  L.volume = L.shape;
  L.dist_begin = L.shape + 1;
  std::vector<char> seen(mesh.num_vertices(), 0);
  for (std::size_t i = 0; i < mesh.num_obstacle_regions(); ++i) {
    for (int v : mesh.wetted_vertices(i)) {
      if (seen[v]) {
        throw PreconditionError("vertex " + std::to_string(v) + " wets two obstacles");
      }
      seen[v] = 1;
      L.dist_vertex.push_back(v);
      L.dist_obstacle.push_back(i);
    }
  }
  L.centroid_begin = L.dist_begin + L.dist_vertex.size();
  L.num_centroid = problem.centroid.size();
  L.size = L.centroid_begin + L.num_centroid;
  return L;
}

Eigen::VectorXd residual(const ShellMesh& mesh, const Problem& problem,
                         const Multipliers& multipliers, const MotionBasis& basis) {
  const auto layout = make_layout(mesh, basis, problem);
  const auto lag = evaluate(mesh, problem, multipliers, basis, layout, false);
  return residual_from(lag, problem, basis, layout);
}

KKTSystem assemble_kkt(const ShellMesh& mesh, const Problem& problem,
                       const Multipliers& multipliers, const MotionBasis& basis,
                       HessianMode mode, double gamma) {
  if (!(gamma > 0.0)) throw ParameterError("gamma must be positive");
  KKTSystem sys;
  sys.layout = make_layout(mesh, basis, problem);
  sys.full_basis = basis.is_full();
  sys.mode = mode;
  sys.likely_kernel = guess_kernel(problem, basis, mode);
  const auto& L = sys.layout;

  auto lag = evaluate(mesh, problem, multipliers, basis, L, mode == HessianMode::exact);
  sys.rhs = -residual_from(lag, problem, basis, L);

  Triplets t = std::move(lag.hess);
  if (mode == HessianMode::sobolev) {
    t.reserve(mesh.num_faces() * 9 * (basis.is_full() ? 9 : 1));
    for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
      const double A = mesh.area(f);
      const auto g = basis_gradients(mesh, f);
      const auto& tri = mesh.triangle(f);
      for (int k = 0; k < 3; ++k) {
        for (int l = 0; l < 3; ++l) {
          const double K = A * (gamma * g[k].dot(g[l]) + (k == l ? 2.0 : 1.0) / 12.0);
          project_block(basis, tri[k], tri[l], K * Mat3::Identity(), t);
        }
      }
    }
  }

  for (std::size_t a = 0; a < basis.dim(); ++a) {
    const int v = basis.owner(static_cast<int>(a));
    const Vec3& u = basis.direction(static_cast<int>(a));
    add_symmetric(t, L.volume, static_cast<int>(a), u.dot(lag.grad_F[v]));
    for (std::size_t c = 0; c < L.num_centroid; ++c) {
      add_symmetric(t, L.centroid_begin + c, static_cast<int>(a), u.dot(lag.grad_C[c][v]));
    }
  }
  for (std::size_t j = 0; j < L.dist_vertex.size(); ++j) {
    const int v = L.dist_vertex[j];
    for (int a = basis.first_dof(v); a < basis.first_dof(v + 1); ++a) {
      add_symmetric(t, L.dist_begin + j, a, basis.direction(a).dot(lag.dist_grad[j]));
    }
  }

  sys.matrix.resize(static_cast<Eigen::Index>(L.size), static_cast<Eigen::Index>(L.size));
  sys.matrix.setFromTriplets(t.begin(), t.end());
  sys.matrix.makeCompressed();
  return sys;
}

KKTSolution solve_kkt(const KKTSystem& system) {
  const auto& A = system.matrix;
  const auto& b = system.rhs;
  if (A.rows() != A.cols() || A.rows() != b.size()) {
    throw PreconditionError("KKT matrix and right-hand side sizes differ");
  }
  const KernelHint hint = system.likely_kernel;

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) {
    throw SingularSystemError("KKT factorization failed: " + lu.lastErrorMessage(), hint);
  }

  double norm_inf = 0.0;
  {
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(A.rows());
    for (int k = 0; k < A.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) rows[it.row()] += std::abs(it.value());
    }
    norm_inf = rows.size() ? rows.maxCoeff() : 0.0;
  }

  // Inverse iteration for the smallest |eigenvalue|.
  std::mt19937 rng(12345);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(A.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  v.normalize();
  double inv_norm = 0.0;
  for (int it = 0; it < 6; ++it) {
    Eigen::VectorXd w = lu.solve(v);
    const double n = w.norm();
    if (!std::isfinite(n)) {
      inv_norm = std::numeric_limits<double>::infinity();
      break;
    }
    inv_norm = std::max(inv_norm, n);
    v = w / n;
  }

  KKTSolution out;
  out.min_abs_eigenvalue = inv_norm > 0.0 ? 1.0 / inv_norm : 0.0;
  out.condition_estimate = norm_inf * inv_norm;
  if (!(out.condition_estimate < 1e12)) {
    throw SingularSystemError("KKT system is numerically singular (condition estimate " +
                                  std::to_string(out.condition_estimate) + ")",
                              hint);
  }

  Eigen::VectorXd x = lu.solve(b);
  const double bnorm = b.norm();
  double rel = 0.0;
  for (int it = 0; it < 4; ++it) {
    const Eigen::VectorXd r = b - A * x;
    rel = bnorm > 0.0 ? r.norm() / bnorm : r.norm();
    if (rel <= 1e-13) break;
    x += lu.solve(r);
  }
  {
    const Eigen::VectorXd r = b - A * x;
    rel = bnorm > 0.0 ? r.norm() / bnorm : r.norm();
  }
  if (!x.allFinite() || rel > 1e-10) {
    throw SingularSystemError("linear solve did not reach 1e-10 relative residual", hint);
  }
  out.linear_residual = rel;

  const auto& L = system.layout;
  out.shape = x.head(static_cast<Eigen::Index>(L.shape));
  out.d_volume = x[static_cast<Eigen::Index>(L.volume)];
  out.d_distance.resize(L.dist_vertex.size());
  for (std::size_t j = 0; j < L.dist_vertex.size(); ++j) out.d_distance[j] = x[L.dist_begin + j];
  out.d_centroid.resize(L.num_centroid);
  for (std::size_t c = 0; c < L.num_centroid; ++c) out.d_centroid[c] = x[L.centroid_begin + c];
  return out;
}

// --- solver ----------------------------------------------------------------

void SolverConfig::validate() const {
  if (!(gamma > 0.0)) throw ParameterError("gamma must be positive");
  if (n_smooth_steps < 0) throw ParameterError("n_smooth_steps must be non-negative");
  if (!(newton_tol > 0.0)) throw ParameterError("newton_tol must be positive");
  if (max_iters < 0) throw ParameterError("max_iters must be non-negative");
  if (!(step_limit_fraction > 0.0)) throw ParameterError("step_limit_fraction must be positive");
  if (!(smooth_step_limit_fraction > 0.0)) {
    throw ParameterError("smooth_step_limit_fraction must be positive");
  }
  if (max_remesh < 0) throw ParameterError("max_remesh must be non-negative");
  for (int a : centroid_axes) {
    if (a < 0 || a > 2) throw ParameterError("centroid axis must be 0, 1 or 2");
  }
  if (remesh.enabled()) remesh.validate();
}

double total_energy(const ShellMesh& mesh, const Problem& problem) {
  const auto& p = problem.params;
  double e = surface_area(mesh, RegionFilter::liquid_air());
  for (std::size_t i = 0; i < p.beta.size(); ++i) {
    e -= p.beta[i] * surface_area(mesh, RegionFilter::liquid_solid(i));
  }
  if (p.bond != 0.0) e += p.bond * gravitational_energy(mesh, p);
  return e;
}

double max_distance_violation(const ShellMesh& mesh, const Problem& problem) {
  double worst = 0.0;
  for (std::size_t i = 0; i < mesh.num_obstacle_regions(); ++i) {
    for (int v : mesh.wetted_vertices(i)) {
      worst = std::max(worst, std::abs(problem.obstacles[i].dist(mesh.vertex(v))));
    }
  }
  return worst;
}

double residual_norm(const ShellMesh& mesh, const Problem& problem,
                     const Multipliers& multipliers) {
  try {
    return residual(mesh, problem, multipliers, MotionBasis::reduced(mesh)).norm();
  } catch (const DegenerateGeometryError&) {
    return residual(mesh, problem, multipliers, MotionBasis::full(mesh)).norm();
  }
}

void record_history(SolverState& state, const Problem& problem, const std::string& phase) {
  HistoryRow row;
  row.iteration = state.iteration;
  row.residual_l2 = residual_norm(state.mesh, problem, state.multipliers);
  row.energy = total_energy(state.mesh, problem);
  row.volume_err = std::abs(enclosed_volume(state.mesh) - problem.params.target_volume) /
                   problem.params.target_volume;
  row.dist_err = max_distance_violation(state.mesh, problem);
  row.phase = phase;
  state.history.push_back(row);
}

StepReport apply_step(SolverState& state, const MotionBasis& basis, const KKTLayout& layout,
                      const KKTSolution& solution, double step_limit_fraction) {
  const ShellMesh& mesh = state.mesh;
  const VertexField U = basis.prolong(solution.shape);
  const auto hmin = min_incident_edge(mesh);

  StepReport rep;
  rep.solution = solution;
  double alpha = 1.0;
  for (std::size_t v = 0; v < U.size(); ++v) {
    const double n = U[v].norm();
    if (n > 0.0) alpha = std::min(alpha, step_limit_fraction * hmin[v] / n);
  }

  for (int halvings = 0;; ++halvings) {
    bool ok = true;
    std::optional<ShellMesh> moved;
    try {
      moved = mesh.displaced(U, alpha);
      for (int f = 0; f < static_cast<int>(mesh.num_faces()) && ok; ++f) {
        ok = moved->normal(f).dot(mesh.normal(f)) > 0.0;
      }
    } catch (const DegenerateGeometryError&) {
      ok = false;
    }
    if (ok) {
      state.mesh = std::move(*moved);
      rep.halvings = halvings;
      break;
    }
    if (halvings == 10) throw NumericalFailure("step inverts elements after 10 halvings");
    alpha *= 0.5;
  }
  rep.scale = alpha;

  auto& m = state.multipliers;
  m.volume += alpha * solution.d_volume;
  for (std::size_t j = 0; j < layout.dist_vertex.size(); ++j) {
    m.distance[layout.dist_vertex[j]] = m.distance_at(layout.dist_vertex[j]) + alpha * solution.d_distance[j];
  }
  m.centroid.resize(layout.num_centroid, 0.0);
  for (std::size_t c = 0; c < layout.num_centroid; ++c) m.centroid[c] += alpha * solution.d_centroid[c];
  return rep;
}

StepReport sobolev_step(SolverState& state, const Problem& problem, const SolverConfig& config) {
  const auto basis = MotionBasis::full(state.mesh);
  const auto sys = assemble_kkt(state.mesh, problem, state.multipliers, basis,
                                HessianMode::sobolev, config.gamma);
  const auto sol = solve_kkt(sys);
  return apply_step(state, basis, sys.layout, sol, config.smooth_step_limit_fraction);
}

StepReport newton_step(SolverState& state, const Problem& problem, const SolverConfig& config) {
  const auto basis = MotionBasis::reduced(state.mesh);
  const auto sys = assemble_kkt(state.mesh, problem, state.multipliers, basis,
                                HessianMode::exact, config.gamma);
  const auto sol = solve_kkt(sys);
  return apply_step(state, basis, sys.layout, sol, config.step_limit_fraction);
}

namespace {

void remesh_state(SolverState& state, const Problem& problem, const RemeshParams& params) {
  state.mesh = remesh(state.mesh, params, problem.obstacles);
  state.multipliers.distance.clear();
}

}  // namespace

RunResult run(SolverState initial, Problem problem, const SolverConfig& config) {
  config.validate();
  problem.validate(initial.mesh);
  if (problem.centroid.empty()) {
    for (int axis : config.centroid_axes) {
      problem.centroid.push_back(
          {axis, volume_centroid_component(initial.mesh, axis) / problem.params.target_volume});
    }
  }

  RunResult res;
  res.state = std::move(initial);
  auto& st = res.state;
  st.multipliers.centroid.resize(problem.centroid.size(), 0.0);
  const bool can_remesh = config.remesh.enabled();

  try {
    if (st.history.empty()) record_history(st, problem, "init");
    for (int k = 0; k < config.n_smooth_steps; ++k) {
      sobolev_step(st, problem, config);
      ++st.iteration;
      record_history(st, problem, "sobolev");
    }
    if (can_remesh && config.n_smooth_steps > 0) {
      remesh_state(st, problem, config.remesh);
      ++res.remesh_count;
      record_history(st, problem, "remesh");
    }

    int newton = 0;
    int trigger_remeshes = 0;
    int fallbacks = 0;
    for (;;) {
      res.final_residual = residual_norm(st.mesh, problem, st.multipliers);
      if (res.final_residual <= config.newton_tol) {
        res.converged = true;
        break;
      }
      if (newton >= config.max_iters) break;
      if (can_remesh && trigger_remeshes < config.max_remesh && st.history.back().phase != "remesh" &&
          mesh_quality(st.mesh).min_angle_deg < config.remesh_trigger) {
        remesh_state(st, problem, config.remesh);
        ++trigger_remeshes;
        ++res.remesh_count;
        record_history(st, problem, "remesh");
      }
      try {
        newton_step(st, problem, config);
        fallbacks = 0;
      } catch (const SingularSystemError&) {
        if (++fallbacks > 3) throw;
        sobolev_step(st, problem, config);
      } catch (const DegenerateGeometryError&) {
        if (++fallbacks > 3) throw;
        sobolev_step(st, problem, config);
      }
      ++newton;
      ++st.iteration;
      record_history(st, problem, "newton");
    }
  } catch (const SingularSystemError& e) {
    res.failed = true;
    res.message = std::string(e.what()) + " (likely kernel: " + to_string(e.hint()) + ")";
  } catch (const NumericalFailure& e) {
    res.failed = true;
    res.message = e.what();
  } catch (const DegenerateGeometryError& e) {
    res.failed = true;
    res.message = e.what();
  } catch (const OutOfDomainError& e) {
    res.failed = true;
    res.message = e.what();
  }
  if (res.failed) {
    res.final_residual = st.history.empty() ? 0.0 : st.history.back().residual_l2;
  } else {
    res.message = res.converged ? "converged" : "iteration budget exhausted";
  }
  return res;
}

}  // namespace capbridge
