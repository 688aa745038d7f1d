#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "capbridge/mesh.hpp"

namespace capbridge {

/// Named per-vertex diagnostic array written into VTK point data.
struct PointArray {
  std::string name;
  std::variant<ScalarField, VertexField> values;
};

/// `<stem>.regions` next to the OBJ file: one `face_index tag` pair per line.
std::filesystem::path region_sidecar_path(const std::filesystem::path& obj_path);

/// Writes positions and faces; region tags go to the sidecar file.
void write_obj(const std::filesystem::path& path, const ShellMesh& mesh);
/// Reads triangles (`f a b c`, `a/b/c` forms accepted). Missing sidecar means
/// every face is liquid-air.
ShellMesh read_obj(const std::filesystem::path& path);

/// Legacy ASCII VTK PolyData with cell-data `region` and optional point data.
void write_vtk(const std::filesystem::path& path, const ShellMesh& mesh,
               const std::vector<PointArray>& point_data = {});
ShellMesh read_vtk(const std::filesystem::path& path);

}  // namespace capbridge
