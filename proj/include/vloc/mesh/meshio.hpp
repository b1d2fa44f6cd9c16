#pragma once

#include <string>

#include "vloc/mesh/tetmesh.hpp"

namespace vloc {

// File format: <basename>.json manifest + <basename>.bin with little-endian
// raw arrays (float32 vertices, uint32 connectivity, uint8 wall labels).
void save_tetmesh(const TetMesh& mesh, const std::string& basename);
TetMesh load_tetmesh(const std::string& basename);

void save_trimesh(const TriMesh& mesh, const std::string& basename);
TriMesh load_trimesh(const std::string& basename);

}  // namespace vloc
