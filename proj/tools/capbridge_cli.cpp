#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>

#include "capbridge/config.hpp"
#include "capbridge/mesh_io.hpp"
#include "capbridge/verify.hpp"

using namespace capbridge;

namespace {

int do_solve(const std::string& path, const std::string& output, bool quiet) {
  ProblemConfig cfg = parse_config(path);
  if (!output.empty()) cfg.output_dir = output;
  const auto res = run_case(cfg, quiet ? nullptr : &std::cout);
  if (!quiet) write_report(std::cout, res.report);
  return res.exit_code;
}

int do_verify(unsigned seed, int fields) {
  bool ok = true;
  auto print = [&](const std::vector<OracleCheck>& checks) {
    for (const auto& c : checks) {
      std::cout << (c.passed() ? "PASS " : "FAIL ") << std::left << std::setw(34) << c.name
                << " samples " << std::setw(3) << c.samples << " max_rel_err " << std::scientific
                << std::setprecision(2) << c.max_rel_error << " tol " << c.tolerance
                << std::defaultfloat << "\n";
      ok = ok && c.passed();
    }
  };
  print(run_identity_checks(seed));
  print(run_derivative_oracles(seed, fields));
  return ok ? 0 : 1;
}

int do_mesh_info(const std::string& path) {
  const std::filesystem::path p(path);
  const ShellMesh mesh = p.extension() == ".vtk" ? read_vtk(p) : read_obj(p);
  std::cout << "vertices: " << mesh.num_vertices() << "\n";
  std::cout << "triangles: " << mesh.num_faces() << "\n";
  std::cout << "closed: " << (mesh.is_closed() ? "yes" : "no") << "\n";
  std::cout << std::setprecision(10);
  std::cout << "area: " << surface_area(mesh) << "\n";
  std::cout << "area_liquid_air: " << surface_area(mesh, RegionFilter::liquid_air()) << "\n";
  for (std::size_t i = 0; i < mesh.num_obstacle_regions(); ++i) {
    std::cout << "obstacle" << i << "_area: " << surface_area(mesh, RegionFilter::liquid_solid(i))
              << "\n";
    std::cout << "obstacle" << i << "_triple_vertices: " << mesh.triple_line_vertices(i).size()
              << "\n";
  }
  if (mesh.is_closed()) std::cout << "volume: " << enclosed_volume(mesh) << "\n";
  const auto q = mesh_quality(mesh);
  std::cout << "min_angle_deg: " << q.min_angle_deg << "\n";
  std::cout << "max_angle_deg: " << q.max_angle_deg << "\n";
  std::cout << "edge_min: " << q.min_edge << "\n";
  std::cout << "edge_mean: " << q.mean_edge << "\n";
  std::cout << "edge_max: " << q.max_edge << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Capillary bridge equilibria by shape-Newton iteration"};
  app.require_subcommand(1);

  auto* solve = app.add_subcommand("solve", "Run a case described by a config file");
  std::string config_path, output;
  bool deterministic = false, quiet = false;
  solve->add_option("config", config_path, "Config file")->required();
  solve->add_option("-o,--output", output, "Override the output directory");
  solve->add_flag("--deterministic", deterministic,
                  "Ordered reductions (assembly is sequential, so always the case)");
  solve->add_flag("-q,--quiet", quiet, "Only write files");

  auto* verify = app.add_subcommand("verify", "Run the finite-difference oracle suites");
  unsigned seed = 7;
  int fields = 20;
  verify->add_option("--seed", seed, "Random seed");
  verify->add_option("--fields", fields, "Random fields per functional");

  auto* info = app.add_subcommand("mesh-info", "Print mesh statistics");
  std::string mesh_path;
  info->add_option("file", mesh_path, "OBJ (with optional .regions sidecar) or VTK")->required();

  auto* presets = app.add_subcommand("presets", "List or print bundled cases");
  presets->require_subcommand(1);
  presets->add_subcommand("list", "List preset names");
  auto* emit = presets->add_subcommand("emit", "Print a preset config");
  std::string preset_name, emit_to;
  emit->add_option("name", preset_name, "Preset name")->required();
  emit->add_option("-o,--output", emit_to, "Write to a file instead of stdout");

  CLI11_PARSE(app, argc, argv);
  (void)deterministic;

  try {
    if (*solve) return do_solve(config_path, output, quiet);
    if (*verify) return do_verify(seed, fields);
    if (*info) return do_mesh_info(mesh_path);
    if (*presets) {
      if (presets->got_subcommand("list")) {
        for (const auto& n : preset_names()) std::cout << n << "\n";
        return 0;
      }
      const std::string text = preset_text(preset_name);
      if (emit_to.empty()) {
        std::cout << text;
      } else {
        std::ofstream(emit_to) << text;
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error in " << e.field();
    if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
    std::cerr << ": " << e.what() << "\n";
    return 3;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
