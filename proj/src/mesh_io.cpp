#include "capbridge/mesh_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "capbridge/errors.hpp"

namespace capbridge {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

int parse_obj_index(const std::string& token, std::size_t num_vertices, int line) {
  const std::string head = token.substr(0, token.find('/'));
  int idx = 0;
  try {
    idx = std::stoi(head);
  } catch (const std::exception&) {
    throw Error("bad face index '" + token + "' on OBJ line " + std::to_string(line));
  }
  if (idx < 0) idx = static_cast<int>(num_vertices) + idx + 1;
  return idx - 1;
}

}  // namespace

std::filesystem::path region_sidecar_path(const std::filesystem::path& obj_path) {
  auto p = obj_path;
  p.replace_extension(".regions");
  return p;
}

void write_obj(const std::filesystem::path& path, const ShellMesh& mesh) {
  auto out = open_out(path);
  out << "# capbridge shell mesh: " << mesh.num_vertices() << " vertices, " << mesh.num_faces()
      << " faces\n";
  for (const auto& p : mesh.vertices()) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (const auto& t : mesh.triangles()) {
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  }
  auto side = open_out(region_sidecar_path(path));
  side << "# face_index region (0 = liquid-air, k = wets obstacle k-1)\n";
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    side << f << ' ' << mesh.region(static_cast<int>(f)) << '\n';
  }
}

ShellMesh read_obj(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<Vec3> pts;
  std::vector<Triangle> tris;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    if (kind == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z())) {
        throw Error("bad vertex on OBJ line " + std::to_string(lineno));
      }
      pts.push_back(p);
    } else if (kind == "f") {
      std::vector<std::string> tokens;
      std::string tok;
      while (ls >> tok) tokens.push_back(tok);
      if (tokens.size() != 3) {
        throw Error("only triangles are supported (OBJ line " + std::to_string(lineno) + ")");
      }
      tris.push_back({parse_obj_index(tokens[0], pts.size(), lineno),
                      parse_obj_index(tokens[1], pts.size(), lineno),
                      parse_obj_index(tokens[2], pts.size(), lineno)});
    }
  }
  std::vector<RegionTag> tags(tris.size(), kLiquidAir);
  const auto sidecar = region_sidecar_path(path);
  if (std::filesystem::exists(sidecar)) {
    auto sin = open_in(sidecar);
    int sline = 0;
    while (std::getline(sin, line)) {
      ++sline;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      long face = -1;
      int tag = 0;
      if (!(ls >> face >> tag) || face < 0 || face >= static_cast<long>(tris.size())) {
        throw Error("bad region entry on line " + std::to_string(sline) + " of " +
                    sidecar.string());
      }
      tags[face] = tag;
    }
  }
  return ShellMesh(std::move(pts), std::move(tris), std::move(tags));
}

void write_vtk(const std::filesystem::path& path, const ShellMesh& mesh,
               const std::vector<PointArray>& point_data) {
  auto out = open_out(path);
  const std::size_t nv = mesh.num_vertices();
  const std::size_t nf = mesh.num_faces();
  out << "# vtk DataFile Version 3.0\ncapbridge shell mesh\nASCII\nDATASET POLYDATA\n";
  out << "POINTS " << nv << " double\n";
  for (const auto& p : mesh.vertices()) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  out << "POLYGONS " << nf << ' ' << 4 * nf << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_DATA " << nf << "\nSCALARS region int 1\nLOOKUP_TABLE default\n";
  for (std::size_t f = 0; f < nf; ++f) out << mesh.region(static_cast<int>(f)) << '\n';
  if (point_data.empty()) return;
  out << "POINT_DATA " << nv << '\n';
  for (const auto& arr : point_data) {
    if (const auto* s = std::get_if<ScalarField>(&arr.values)) {
      if (s->size() != nv) throw PreconditionError("point array " + arr.name + " has wrong size");
      out << "SCALARS " << arr.name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : *s) out << v << '\n';
    } else {
      const auto& vf = std::get<VertexField>(arr.values);
      if (vf.size() != nv) throw PreconditionError("point array " + arr.name + " has wrong size");
      out << "VECTORS " << arr.name << " double\n";
      for (const auto& v : vf) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    }
  }
}

ShellMesh read_vtk(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<Vec3> pts;
  std::vector<Triangle> tris;
  std::vector<RegionTag> tags;
  std::string word;
  while (in >> word) {
    if (word == "POINTS") {
      std::size_t n = 0;
      std::string type;
      in >> n >> type;
      pts.resize(n);
      for (auto& p : pts) in >> p.x() >> p.y() >> p.z();
    } else if (word == "POLYGONS") {
      std::size_t n = 0, total = 0;
      in >> n >> total;
      tris.resize(n);
      for (auto& t : tris) {
        int count = 0;
        in >> count;
        if (count != 3) throw Error("only triangular polygons are supported in " + path.string());
        in >> t[0] >> t[1] >> t[2];
      }
    } else if (word == "SCALARS") {
      std::string name, type;
      in >> name >> type;
      std::string rest;
      std::getline(in, rest);
      std::string lut, lut_name;
      in >> lut >> lut_name;
      if (name == "region" && tags.empty()) {
        tags.resize(tris.size());
        for (auto& t : tags) in >> t;
      }
    }
    if (!in) throw Error("malformed VTK file " + path.string());
  }
  if (tags.empty()) tags.assign(tris.size(), kLiquidAir);
  return ShellMesh(std::move(pts), std::move(tris), std::move(tags));
}

}  // namespace capbridge
