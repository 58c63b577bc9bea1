#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "romfv/field.hpp"
#include "romfv/mesh.hpp"

namespace romfv {

/// Plain-text mesh format, see docs/mesh_format.md. Coordinates are written in
/// shortest round-trip form, so save followed by load is bit-exact.
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

void save_mesh(const Mesh& mesh, const std::filesystem::path& path);
Mesh load_mesh(const std::filesystem::path& path);

/// Counter-clockwise point loop of every cell, recovered from the faces.
std::vector<std::vector<Index>> cell_polygons(const Mesh& mesh);

/// Legacy VTK unstructured grid (ASCII) with the given fields as cell data.
void write_vtk(const std::filesystem::path& path, const Mesh& mesh,
               const std::vector<std::pair<std::string, const Field*>>& fields);

}  // namespace romfv
