#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "capbridge/distance.hpp"
#include "capbridge/forces.hpp"
#include "capbridge/mesh.hpp"
#include "capbridge/system.hpp"

namespace capbridge {

struct ObstacleSpec {
  enum class Kind { sphere, plane, levelset };
  Kind kind = Kind::plane;
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  double offset = 0.0;
  Vec3 normal = Vec3::UnitZ();
  std::filesystem::path file;
  double contact_angle = 90.0;  // degrees
  int line = 0;                 // where the section started
};

struct GeometrySpec {
  enum class Kind { cylinder, mesh };
  Kind kind = Kind::cylinder;
  double radius = 1.0;
  double z_min = -0.1;
  double z_max = 0.1;
  double edge_length = 0.0625;
  std::filesystem::path file;
};

/// Everything a `solve` run needs. See README for the file grammar.
struct ProblemConfig {
  std::vector<ObstacleSpec> obstacles;
  GeometrySpec geometry;
  double target_volume = 0.0;
  double bond = 0.0;
  Vec3 gravity = Vec3::UnitZ();
  double sigma = 1.0;
  SolverConfig solver;
  std::filesystem::path output_dir = "out";
};

/// Throws ConfigError naming the offending key and line.
ProblemConfig parse_config(const std::filesystem::path& path);
/// Relative file names are resolved against `base`.
ProblemConfig parse_config_text(const std::string& text,
                                const std::filesystem::path& base = ".");

std::vector<ObstacleField> make_obstacles(const ProblemConfig& config);
Problem make_problem(const ProblemConfig& config);
ShellMesh make_initial_mesh(const ProblemConfig& config);

struct ObstacleReport {
  ObstacleForces forces;
  ContactAngleStats contact;
  double beta = 0.0;
  double wetted_area = 0.0;
};

struct CaseReport {
  std::string status;
  int iterations = 0;
  double residual_l2 = 0.0;
  double lambda_vol = 0.0;
  double delta_p = 0.0;
  double area_total = 0.0;
  double area_liquid_air = 0.0;
  double volume = 0.0;
  double volume_error = 0.0;
  double energy = 0.0;
  double gravity_energy = 0.0;
  double max_dist = 0.0;
  std::size_t triangles = 0;
  std::vector<ObstacleReport> obstacles;
};

CaseReport make_report(const RunResult& result, const ProblemConfig& config);
void write_report(std::ostream& out, const CaseReport& report);
void write_history(std::ostream& out, const std::vector<HistoryRow>& history);

struct CaseResult {
  RunResult run;
  CaseReport report;
  /// 0 converged, 2 not converged, 4 numerical failure.
  int exit_code = 0;
};

/// Runs the solver and writes initial/final meshes (VTK, OBJ + sidecar),
/// history.txt and report.txt into config.output_dir. Outputs are written
/// also when the solver fails.
CaseResult run_case(const ProblemConfig& config, std::ostream* log = nullptr);

/// Bundled cases: orr, orr_20400, orr_41630, bond_0.5, bond_1, bond_4,
/// bond_8, unduloid.
std::vector<std::string> preset_names();
/// Config file text of a preset; throws ParameterError for unknown names.
std::string preset_text(const std::string& name);

}  // namespace capbridge
