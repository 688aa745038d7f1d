#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "capbridge/distance.hpp"
#include "capbridge/errors.hpp"
#include "capbridge/mesh.hpp"
#include "capbridge/remesh.hpp"

namespace capbridge {

/// Constrains the volume centroid along `axis` (0-based):
///   (1 / V0) int <f2_axis, n> ds = target.
struct CentroidConstraint {
  int axis = 0;
  double target = 0.0;
};

/// Everything that defines the minimization problem apart from the mesh.
struct Problem {
  std::vector<ObstacleField> obstacles;
  EnergyParams params;
  std::vector<CentroidConstraint> centroid;

  /// Checks parameter invariants and that the mesh tags only name known
  /// obstacles.
  void validate(const ShellMesh& mesh) const;
};

struct Multipliers {
  double volume = 0.0;
  /// Keyed by vertex index; missing entries are zero.
  std::map<int, double> distance;
  /// Parallel to Problem::centroid.
  std::vector<double> centroid;

  double distance_at(int vertex) const {
    auto it = distance.find(vertex);
    return it == distance.end() ? 0.0 : it->second;
  }
};

/// Linear map from reduced coefficients to per-vertex displacements. Each
/// column is a unit vector attached to one vertex.
class MotionBasis {
 public:
  /// Vertex normal for every vertex off the triple lines, the two co-normals
  /// (liquid-air, liquid-solid) on them.
  static MotionBasis reduced(const ShellMesh& mesh);
  /// Three Cartesian directions per vertex.
  static MotionBasis full(const ShellMesh& mesh);

  std::size_t dim() const { return directions_.size(); }
  std::size_t num_vertices() const { return first_.size() - 1; }
  int first_dof(int v) const { return first_[v]; }
  int num_dofs(int v) const { return first_[v + 1] - first_[v]; }
  const Vec3& direction(int dof) const { return directions_[dof]; }
  int owner(int dof) const { return owner_[dof]; }
  bool is_full() const { return full_; }

  VertexField prolong(const Eigen::VectorXd& coeffs) const;
  /// Transpose of prolong: per-vertex covectors to reduced coefficients.
  Eigen::VectorXd restrict(const VertexField& covector) const;

 private:
  std::vector<int> first_;
  std::vector<Vec3> directions_;
  std::vector<int> owner_;
  bool full_ = false;
};

MotionBasis build_motion_basis(const ShellMesh& mesh);

enum class HessianMode { exact, sobolev };

/// Row/column layout: [shape dofs | volume | distance rows | centroid rows].
struct KKTLayout {
  std::size_t shape = 0;
  std::size_t volume = 0;
  std::size_t dist_begin = 0;
  std::vector<int> dist_vertex;
  std::vector<std::size_t> dist_obstacle;
  std::size_t centroid_begin = 0;
  std::size_t num_centroid = 0;
  std::size_t size = 0;
};

/// Constrained vertices (every vertex of a wetted face) in row order.
KKTLayout make_layout(const ShellMesh& mesh, const MotionBasis& basis, const Problem& problem);

struct KKTSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  KKTLayout layout;
  bool full_basis = false;
  HessianMode mode = HessianMode::exact;
  KernelHint likely_kernel = KernelHint::none;
};

/// Gradient of the Lagrangian in the basis followed by the constraint values:
///   [P^T dL ; F - V0 ; dist(s_j) ; centroid_c / V0 - target_c].
Eigen::VectorXd residual(const ShellMesh& mesh, const Problem& problem,
                         const Multipliers& multipliers, const MotionBasis& basis);

/// Shape block is the exact second derivative of the Lagrangian (`exact`) or
/// the H1 product gamma <grad V, grad W> + <V, W> (`sobolev`). Off-diagonal
/// blocks hold the constraint first derivatives; rhs = -residual.
KKTSystem assemble_kkt(const ShellMesh& mesh, const Problem& problem,
                       const Multipliers& multipliers, const MotionBasis& basis,
                       HessianMode mode, double gamma = 1.0);

struct KKTSolution {
  Eigen::VectorXd shape;
  double d_volume = 0.0;
  std::vector<double> d_distance;
  std::vector<double> d_centroid;
  /// |Ax - b| / |b|.
  double linear_residual = 0.0;
  /// Inverse-iteration estimate of the smallest |eigenvalue| and of
  /// |A|_inf / that value.
  double min_abs_eigenvalue = 0.0;
  double condition_estimate = 0.0;
};

/// Sparse LU with a few steps of iterative refinement. Throws
/// SingularSystemError when the factorization fails or the condition estimate
/// exceeds 1e12.
KKTSolution solve_kkt(const KKTSystem& system);

struct SolverConfig {
  double gamma = 1.0;
  int n_smooth_steps = 5;
  /// Newton phase: remesh when the smallest triangle angle drops below this
  /// many degrees (at most `max_remesh` times).
  double remesh_trigger = 10.0;
  int max_remesh = 2;
  double newton_tol = 1e-8;
  int max_iters = 30;
  /// Newton steps: cap on |vertex update| relative to the shortest incident edge.
  double step_limit_fraction = 0.4;
  /// Same cap for the Sobolev phase. Unlimited by default: the cylinder has to
  /// shrink by O(1) within the smoothing steps, so only inversion halving applies.
  double smooth_step_limit_fraction = std::numeric_limits<double>::infinity();
  /// Remeshing between the phases; disabled unless a length or cell count is set.
  RemeshParams remesh;
  /// Centroid axes to constrain at their initial value.
  std::vector<int> centroid_axes;

  void validate() const;
};

struct HistoryRow {
  int iteration = 0;
  double residual_l2 = 0.0;
  double energy = 0.0;
  double volume_err = 0.0;
  double dist_err = 0.0;
  std::string phase;
};

struct SolverState {
  ShellMesh mesh;
  Multipliers multipliers;
  std::vector<HistoryRow> history;
  int iteration = 0;
};

struct StepReport {
  double scale = 1.0;
  int halvings = 0;
  KKTSolution solution;
};

/// S(LA) - sum beta_i S(LS_i) + bond G.
double total_energy(const ShellMesh& mesh, const Problem& problem);
/// Largest |dist| over constrained vertices.
double max_distance_violation(const ShellMesh& mesh, const Problem& problem);
/// Residual l2 in the reduced basis (full basis if the reduced one cannot be
/// built on this mesh).
double residual_norm(const ShellMesh& mesh, const Problem& problem,
                     const Multipliers& multipliers);

/// H1-preconditioned step over full 3-component nodal fields.
StepReport sobolev_step(SolverState& state, const Problem& problem, const SolverConfig& config);
/// Exact-Hessian step in the reduced (normal / co-normal) basis.
StepReport newton_step(SolverState& state, const Problem& problem, const SolverConfig& config);

/// Applies `q` = (shape, multipliers) scaled to respect the step limit,
/// halving up to 10 times when a face would invert.
StepReport apply_step(SolverState& state, const MotionBasis& basis, const KKTLayout& layout,
                      const KKTSolution& solution, double step_limit_fraction);

struct RunResult {
  SolverState state;
  bool converged = false;
  double final_residual = 0.0;
  int remesh_count = 0;
  /// Set when a numerical error stopped the run; `state` holds the last
  /// accepted iterate.
  bool failed = false;
  std::string message;
};

/// Sobolev phase, remesh, Newton phase until the residual reaches newton_tol.
/// Multipliers of wetted vertices are discarded on every remesh. Numerical
/// errors end the run with `failed` set; invalid input still throws.
RunResult run(SolverState initial, Problem problem, const SolverConfig& config);

/// Appends a history row for the current state.
void record_history(SolverState& state, const Problem& problem, const std::string& phase);

}  // namespace capbridge
