#include "capbridge/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "capbridge/mesh_io.hpp"

namespace capbridge {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line;
};

class Parser {
 public:
  Parser(const std::string& text, std::filesystem::path base) : base_(std::move(base)) {
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    std::string section;
    std::map<std::string, Entry>* current = nullptr;
    while (std::getline(in, raw)) {
      ++line;
      std::string s = raw;
      const auto hash = s.find_first_of("#;");
      if (hash != std::string::npos) s = s.substr(0, hash);
      s = trim(s);
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') throw ConfigError("malformed section header", s, line);
        section = trim(s.substr(1, s.size() - 2));
        if (section == "obstacle") {
          obstacles_.emplace_back();
          obstacle_lines_.push_back(line);
          current = &obstacles_.back();
        } else if (section == "problem" || section == "geometry" || section == "solver" ||
                   section == "output") {
          if (!seen_.insert(section).second) {
            throw ConfigError("section appears twice", section, line);
          }
          current = &sections_[section];
        } else {
          throw ConfigError("unknown section", section, line);
        }
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("expected key = value", s, line);
      const std::string key = trim(s.substr(0, eq));
      const std::string value = trim(s.substr(eq + 1));
      if (!current) throw ConfigError("key outside of a section", key, line);
      if (key.empty()) throw ConfigError("empty key", s, line);
      if (value.empty()) throw ConfigError("missing value", section + "." + key, line);
      if (!current->emplace(key, Entry{value, line}).second) {
        throw ConfigError("duplicate key", section + "." + key, line);
      }
    }
  }

  ProblemConfig build() {
    ProblemConfig c;
    auto& problem = sections_["problem"];
    check_keys("problem", problem, {"volume", "bond", "gravity", "sigma"});
    c.target_volume = require_real("problem", problem, "volume");
    c.bond = real_or("problem", problem, "bond", 0.0);
    c.gravity = vec_or("problem", problem, "gravity", Vec3::UnitZ());
    c.sigma = real_or("problem", problem, "sigma", 1.0);
    if (!(c.target_volume > 0.0)) fail("volume must be positive", "problem", problem, "volume");
    if (c.bond < 0.0) fail("bond number must be non-negative", "problem", problem, "bond");
    if (std::abs(c.gravity.norm() - 1.0) > 1e-9) {
      fail("gravity must be a unit vector", "problem", problem, "gravity");
    }
    if (!(c.sigma > 0.0)) fail("sigma must be positive", "problem", problem, "sigma");

    if (obstacles_.empty()) throw ConfigError("at least one [obstacle] section is required", "obstacle", 0);
    for (std::size_t i = 0; i < obstacles_.size(); ++i) {
      auto& o = obstacles_[i];
      const std::string sec = "obstacle[" + std::to_string(i) + "]";
      check_keys(sec, o, {"kind", "center", "radius", "offset", "normal", "file", "contact_angle"});
      ObstacleSpec spec;
      spec.line = obstacle_lines_[i];
      const std::string kind = require(sec, o, "kind", obstacle_lines_[i]);
      if (kind == "sphere") {
        spec.kind = ObstacleSpec::Kind::sphere;
        spec.center = require_vec(sec, o, "center");
        spec.radius = require_real(sec, o, "radius");
        if (!(spec.radius > 0.0)) fail("radius must be positive", sec, o, "radius");
      } else if (kind == "plane") {
        spec.kind = ObstacleSpec::Kind::plane;
        spec.offset = real_or(sec, o, "offset", 0.0);
        spec.normal = vec_or(sec, o, "normal", Vec3::UnitZ());
        if (std::abs(spec.normal.norm() - 1.0) > 1e-9) fail("normal must be a unit vector", sec, o, "normal");
      } else if (kind == "levelset") {
        spec.kind = ObstacleSpec::Kind::levelset;
        spec.file = path_of(require(sec, o, "file", obstacle_lines_[i]));
      } else {
        fail("kind must be sphere, plane or levelset", sec, o, "kind");
      }
      spec.contact_angle = require_real(sec, o, "contact_angle");
      if (!(spec.contact_angle > 0.0 && spec.contact_angle < 180.0)) {
        fail("contact angle must lie in (0, 180) degrees", sec, o, "contact_angle");
      }
      c.obstacles.push_back(spec);
    }

    auto& geo = sections_["geometry"];
    check_keys("geometry", geo, {"kind", "radius", "z_min", "z_max", "edge_length", "file"});
    const std::string gkind = geo.count("kind") ? geo["kind"].value : "cylinder";
    if (gkind == "cylinder") {
      c.geometry.kind = GeometrySpec::Kind::cylinder;
      c.geometry.radius = real_or("geometry", geo, "radius", 1.0);
      c.geometry.z_min = real_or("geometry", geo, "z_min", -0.1);
      c.geometry.z_max = real_or("geometry", geo, "z_max", 0.1);
      c.geometry.edge_length = real_or("geometry", geo, "edge_length", 0.0625);
      if (!(c.geometry.radius > 0.0)) fail("radius must be positive", "geometry", geo, "radius");
      if (!(c.geometry.z_max > c.geometry.z_min)) fail("z_max must exceed z_min", "geometry", geo, "z_max");
      if (!(c.geometry.edge_length > 0.0)) fail("edge_length must be positive", "geometry", geo, "edge_length");
    } else if (gkind == "mesh") {
      c.geometry.kind = GeometrySpec::Kind::mesh;
      c.geometry.file = path_of(require("geometry", geo, "file", 0));
    } else {
      fail("kind must be cylinder or mesh", "geometry", geo, "kind");
    }

    auto& sol = sections_["solver"];
    check_keys("solver", sol,
               {"gamma", "smooth_steps", "newton_tol", "max_iters", "step_limit",
                "smooth_step_limit", "remesh_edge_length", "remesh_cells", "remesh_iterations", "remesh_trigger",
                "max_remesh", "centroid"});
    auto& s = c.solver;
    s.gamma = real_or("solver", sol, "gamma", s.gamma);
    s.n_smooth_steps = int_or("solver", sol, "smooth_steps", s.n_smooth_steps);
    s.newton_tol = real_or("solver", sol, "newton_tol", s.newton_tol);
    s.max_iters = int_or("solver", sol, "max_iters", s.max_iters);
    s.step_limit_fraction = real_or("solver", sol, "step_limit", s.step_limit_fraction);
    s.smooth_step_limit_fraction =
        real_or("solver", sol, "smooth_step_limit", s.smooth_step_limit_fraction);
    s.remesh.target_edge_length = real_or("solver", sol, "remesh_edge_length", 0.0);
    s.remesh.target_cells = static_cast<std::size_t>(int_or("solver", sol, "remesh_cells", 0));
    s.remesh.iterations = int_or("solver", sol, "remesh_iterations", s.remesh.iterations);
    s.remesh_trigger = real_or("solver", sol, "remesh_trigger", s.remesh_trigger);
    s.max_remesh = int_or("solver", sol, "max_remesh", s.max_remesh);
    if (sol.count("centroid")) {
      std::istringstream in(sol["centroid"].value);
      std::string tok;
      while (in >> tok) {
        if (tok == "x1") {
          s.centroid_axes.push_back(0);
        } else if (tok == "x2") {
          s.centroid_axes.push_back(1);
        } else if (tok == "x3") {
          s.centroid_axes.push_back(2);
        } else if (tok != "none") {
          fail("centroid entries must be x1, x2 or x3", "solver", sol, "centroid");
        }
      }
    }
    try {
      s.validate();
    } catch (const ParameterError& e) {
      throw ConfigError(e.what(), "solver", sol.empty() ? 0 : sol.begin()->second.line);
    }
    if (s.remesh.target_edge_length < 0.0) {
      fail("remesh_edge_length must be positive", "solver", sol, "remesh_edge_length");
    }

    auto& out = sections_["output"];
    check_keys("output", out, {"directory"});
    if (out.count("directory")) c.output_dir = path_of(out["directory"].value);
    return c;
  }

 private:
  using Section = std::map<std::string, Entry>;

  [[noreturn]] void fail(const std::string& what, const std::string& sec, Section& s,
                         const std::string& key) {
    const int line = s.count(key) ? s[key].line : 0;
    throw ConfigError(what, sec + "." + key, line);
  }

  void check_keys(const std::string& sec, const Section& s, std::set<std::string> allowed) {
    for (const auto& [k, e] : s) {
      if (!allowed.count(k)) throw ConfigError("unknown key", sec + "." + k, e.line);
    }
  }

  std::string require(const std::string& sec, Section& s, const std::string& key, int line) {
    auto it = s.find(key);
    if (it == s.end()) throw ConfigError("missing required key", sec + "." + key, line);
    return it->second.value;
  }

  double parse_real(const std::string& sec, const std::string& key, const Entry& e) {
    double v = 0.0;
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    auto [p, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || p != end || !std::isfinite(v)) {
      throw ConfigError("expected a real number, got '" + e.value + "'", sec + "." + key, e.line);
    }
    return v;
  }

  double require_real(const std::string& sec, Section& s, const std::string& key) {
    auto it = s.find(key);
    if (it == s.end()) throw ConfigError("missing required key", sec + "." + key, 0);
    return parse_real(sec, key, it->second);
  }

  double real_or(const std::string& sec, Section& s, const std::string& key, double def) {
    auto it = s.find(key);
    return it == s.end() ? def : parse_real(sec, key, it->second);
  }

  int int_or(const std::string& sec, Section& s, const std::string& key, int def) {
    auto it = s.find(key);
    if (it == s.end()) return def;
    int v = 0;
    const auto& str = it->second.value;
    auto [p, ec] = std::from_chars(str.data(), str.data() + str.size(), v);
    if (ec != std::errc() || p != str.data() + str.size() || v < 0) {
      throw ConfigError("expected a non-negative integer, got '" + str + "'", sec + "." + key,
                        it->second.line);
    }
    return v;
  }

  Vec3 parse_vec(const std::string& sec, const std::string& key, const Entry& e) {
    std::istringstream in(e.value);
    std::string a, b, c, extra;
    if (!(in >> a >> b >> c) || (in >> extra)) {
      throw ConfigError("expected three reals", sec + "." + key, e.line);
    }
    return {parse_real(sec, key, {a, e.line}), parse_real(sec, key, {b, e.line}),
            parse_real(sec, key, {c, e.line})};
  }

  Vec3 require_vec(const std::string& sec, Section& s, const std::string& key) {
    auto it = s.find(key);
    if (it == s.end()) throw ConfigError("missing required key", sec + "." + key, 0);
    return parse_vec(sec, key, it->second);
  }

  Vec3 vec_or(const std::string& sec, Section& s, const std::string& key, const Vec3& def) {
    auto it = s.find(key);
    return it == s.end() ? def : parse_vec(sec, key, it->second);
  }

  std::filesystem::path path_of(const std::string& v) const {
    std::filesystem::path p(v);
    return p.is_absolute() ? p : base_ / p;
  }

  std::filesystem::path base_;
  std::map<std::string, Section> sections_;
  std::set<std::string> seen_;
  std::vector<Section> obstacles_;
  std::vector<int> obstacle_lines_;
};

std::string vec_str(const Vec3& v) {
  std::ostringstream o;
  o << std::setprecision(10) << v.x() << " " << v.y() << " " << v.z();
  return o.str();
}

}  // namespace

ProblemConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file", path.string(), 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.parent_path().empty() ? "." : path.parent_path());
}

ProblemConfig parse_config_text(const std::string& text, const std::filesystem::path& base) {
  Parser p(text, base);
  return p.build();
}

std::vector<ObstacleField> make_obstacles(const ProblemConfig& config) {
  std::vector<ObstacleField> out;
  for (const auto& o : config.obstacles) {
    switch (o.kind) {
      case ObstacleSpec::Kind::sphere:
        out.push_back(sphere_field(o.center, o.radius));
        break;
      case ObstacleSpec::Kind::plane:
        out.push_back(plane_field(o.offset, o.normal));
        break;
      case ObstacleSpec::Kind::levelset:
        out.push_back(grid_field(read_levelset_grid(o.file)));
        break;
    }
  }
  return out;
}

Problem make_problem(const ProblemConfig& config) {
  Problem p;
  p.obstacles = make_obstacles(config);
  for (const auto& o : config.obstacles) p.params.beta.push_back(beta_from_contact_angle(o.contact_angle));
  p.params.bond = config.bond;
  p.params.gravity_dir = config.gravity;
  p.params.target_volume = config.target_volume;
  p.params.sigma = config.sigma;
  return p;
}

ShellMesh make_initial_mesh(const ProblemConfig& config) {
  const auto& g = config.geometry;
  if (g.kind == GeometrySpec::Kind::cylinder) {
    return generate_cylinder(g.radius, g.z_min, g.z_max, g.edge_length);
  }
  const auto ext = g.file.extension().string();
  if (ext == ".vtk") return read_vtk(g.file);
  return read_obj(g.file);
}

CaseReport make_report(const RunResult& result, const ProblemConfig& config) {
  const auto& st = result.state;
  const auto& mesh = st.mesh;
  const Problem problem = make_problem(config);
  CaseReport r;
  r.status = result.converged ? "converged" : (result.failed ? "failed" : "not converged");
  r.iterations = st.iteration;
  r.residual_l2 = result.final_residual;
  r.lambda_vol = st.multipliers.volume;
  r.delta_p = -st.multipliers.volume;
  r.area_total = surface_area(mesh);
  r.area_liquid_air = surface_area(mesh, RegionFilter::liquid_air());
  r.volume = enclosed_volume(mesh);
  r.volume_error = std::abs(r.volume - config.target_volume) / config.target_volume;
  r.energy = total_energy(mesh, problem);
  r.gravity_energy = config.bond * gravitational_energy(mesh, config.gravity);
  r.max_dist = max_distance_violation(mesh, problem);
  r.triangles = mesh.num_faces();
  for (std::size_t i = 0; i < config.obstacles.size(); ++i) {
    ObstacleReport o;
    o.beta = problem.params.beta[i];
    o.wetted_area = surface_area(mesh, RegionFilter::liquid_solid(i));
    if (i < mesh.num_obstacle_regions() && o.wetted_area > 0.0) {
      o.forces = obstacle_forces(mesh, st.multipliers.volume, i, config.sigma);
      o.contact = contact_angle_error(mesh, i, o.beta);
    }
    r.obstacles.push_back(o);
  }
  return r;
}

void write_report(std::ostream& out, const CaseReport& r) {
  out << std::setprecision(10);
  out << "status: " << r.status << "\n";
  out << "iterations: " << r.iterations << "\n";
  out << "residual_l2: " << r.residual_l2 << "\n";
  out << "lambda_vol: " << r.lambda_vol << "\n";
  out << "delta_p: " << r.delta_p << "\n";
  out << "surface_area: " << r.area_total << "\n";
  out << "surface_area_liquid_air: " << r.area_liquid_air << "\n";
  out << "volume: " << r.volume << "\n";
  out << "volume_error: " << r.volume_error << "\n";
  out << "energy: " << r.energy << "\n";
  out << "gravity_energy: " << r.gravity_energy << "\n";
  out << "max_dist: " << r.max_dist << "\n";
  out << "triangles: " << r.triangles << "\n";
  for (std::size_t i = 0; i < r.obstacles.size(); ++i) {
    const auto& o = r.obstacles[i];
    const std::string p = "obstacle" + std::to_string(i) + "_";
    out << p << "wetted_area: " << o.wetted_area << "\n";
    out << p << "F_p: " << vec_str(o.forces.pressure) << "\n";
    out << p << "F_s: " << vec_str(o.forces.tension) << "\n";
    out << p << "F_t: " << vec_str(o.forces.total) << "\n";
    out << p << "F_p_norm: " << o.forces.pressure.norm() << "\n";
    out << p << "F_s_norm: " << o.forces.tension.norm() << "\n";
    out << p << "F_t_norm: " << o.forces.total.norm() << "\n";
    out << p << "beta: " << o.beta << "\n";
    out << p << "contact_cos_mean: " << o.contact.mean_cosine << "\n";
    out << p << "contact_cos_mean_abs_error: " << o.contact.mean_abs_error << "\n";
    out << p << "contact_cos_max_abs_error: " << o.contact.max_abs_error << "\n";
  }
}

void write_history(std::ostream& out, const std::vector<HistoryRow>& history) {
  out << "# iter residual_l2 energy volume_err dist_err\n";
  out << std::setprecision(12);
  for (const auto& h : history) {
    out << h.iteration << " " << h.residual_l2 << " " << h.energy << " " << h.volume_err << " "
        << h.dist_err << "\n";
  }
}

CaseResult run_case(const ProblemConfig& config, std::ostream* log) {
  const Problem problem = make_problem(config);
  SolverState state;
  state.mesh = make_initial_mesh(config);

  std::filesystem::create_directories(config.output_dir);
  write_vtk(config.output_dir / "initial.vtk", state.mesh);
  write_obj(config.output_dir / "initial.obj", state.mesh);
  if (log) *log << "initial mesh: " << state.mesh.num_faces() << " triangles\n";

  CaseResult out;
  out.run = run(std::move(state), problem, config.solver);
  const auto& st = out.run.state;
  {
    std::ofstream h(config.output_dir / "history.txt");
    write_history(h, st.history);
  }
  write_vtk(config.output_dir / "final.vtk", st.mesh, {{"normal", vertex_normals(st.mesh)}});
  write_obj(config.output_dir / "final.obj", st.mesh);
  out.report = make_report(out.run, config);
  {
    std::ofstream r(config.output_dir / "report.txt");
    write_report(r, out.report);
    if (!out.run.message.empty()) r << "message: " << out.run.message << "\n";
  }
  if (log) {
    for (const auto& h : st.history) {
      *log << std::setw(4) << h.iteration << "  " << std::setw(8) << h.phase << "  residual "
           << std::scientific << std::setprecision(3) << h.residual_l2 << "  volume_err "
           << h.volume_err << "  dist_err " << h.dist_err << std::defaultfloat << "\n";
    }
    *log << out.run.message << "\n";
  }
  out.exit_code = out.run.converged ? 0 : (out.run.failed ? 4 : 2);
  return out;
}

// --- presets -----------------------------------------------------------------

namespace {

const char* kOrrBase = R"(# Sphere (R = 1) touching a plate, both wetted at 40 degrees, V0 = 0.165.
# Sphere centre at (0, 0, 1) gives zero gap; the plate occupies x3 < 0.
[problem]
volume = 0.165
bond = 0

[obstacle]
kind = sphere
center = 0 0 1
radius = 1
contact_angle = 40

[obstacle]
kind = plane
offset = 0
normal = 0 0 1
contact_angle = 40

[geometry]
kind = cylinder
radius = 1
z_min = -0.1
z_max = 0.1
edge_length = 0.0625

[solver]
gamma = 1
smooth_steps = 5
newton_tol = 1e-8
max_iters = 30
step_limit = 0.4
)";

std::string orr_preset(std::size_t cells, const std::string& dir) {
  return std::string(kOrrBase) + "remesh_cells = " + std::to_string(cells) +
         "\n\n[output]\ndirectory = " + dir + "\n";
}

std::string bond_preset(const std::string& b) {
  std::string s = orr_preset(13728, "bond_" + b + "_out");
  const std::string from = "bond = 0\n";
  const std::string to =
      "bond = " + b +
      "\n# g enters the energy as G = int <g, x> dx, so g = -x2 pulls the liquid towards +x2.\n"
      "gravity = 0 -1 0\n";
  s.replace(s.find(from), from.size(), to);
  // b = 8 needs a few more smoothing steps before the Newton phase.
  const std::string steps = "smooth_steps = 5\n";
  s.replace(s.find(steps), steps.size(), "smooth_steps = 10\n");
  return s;
}

const char* kUnduloid = R"(# Unit sphere over a plate, 30 degrees on the sphere, 80 on the plate, V0 = 3.6.
# The starting shape must be supplied as an OBJ mesh with a region sidecar
# (tag 1 on the sphere, tag 2 on the plate). The gap between sphere and plate
# is 2.2 here; adjust `center` if your geometry uses another convention.
[problem]
volume = 3.6
bond = 0

[obstacle]
kind = sphere
center = 0 0 3.2
radius = 1
contact_angle = 30

[obstacle]
kind = plane
offset = 0
normal = 0 0 1
contact_angle = 80

[geometry]
kind = mesh
file = unduloid.obj

[solver]
smooth_steps = 0
newton_tol = 1e-8
max_iters = 30

[output]
directory = unduloid_out
)";

}  // namespace

std::vector<std::string> preset_names() {
  return {"orr", "orr_20400", "orr_41630", "bond_0.5", "bond_1", "bond_4", "bond_8", "unduloid"};
}

std::string preset_text(const std::string& name) {
  if (name == "orr") return orr_preset(13728, "orr_out");
  if (name == "orr_20400") return orr_preset(20400, "orr_20400_out");
  if (name == "orr_41630") return orr_preset(41630, "orr_41630_out");
  if (name == "bond_0.5") return bond_preset("0.5");
  if (name == "bond_1") return bond_preset("1");
  if (name == "bond_4") return bond_preset("4");
  if (name == "bond_8") return bond_preset("8");
  if (name == "unduloid") return kUnduloid;
  throw ParameterError("unknown preset '" + name + "'");
}

}  // namespace capbridge
