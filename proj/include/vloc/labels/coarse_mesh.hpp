#pragma once

#include <string>

#include "vloc/heart/heart_model.hpp"

namespace vloc {

// Coarse classification scaffold: the mean-shape ventricular surface meshed
// at low resolution. Every vertex is a class; every triangle carries binary
// v/m labels. Shared across all hearts via the normalized coordinates.
struct CoarseMesh {
    CoordSurface surf;
    double mean_edge = 0.0;

    int n_classes() const { return surf.mesh.n_vertices(); }
    int n_triangles() const { return surf.mesh.n_tris(); }

    // Triangles sharing at least one vertex, per triangle (used by the
    // decoder's exclusion rule).
    std::vector<std::vector<int>> vertex_sharing_neighbors() const;
};

// Meshes the mean shape with a dilated lattice (the 3 mm RV wall survives
// coarse cells) and iterates the cell size until the triangle count lands
// within 25% of the target.
CoarseMesh build_coarse_mesh(const ShapeParams& params, double rv_wall_mm, int target_triangles);

void save_coarse_mesh(const CoarseMesh& cm, const std::string& basename);
CoarseMesh load_coarse_mesh(const std::string& basename);

}  // namespace vloc
