#pragma once

#include <functional>

#include "vloc/mesh/tetmesh.hpp"

namespace vloc {

// Meshes the region {f <= 0} with a Kuhn (6-tets-per-cube) lattice of cell
// size h, keeps the largest face-connected component and projects boundary
// vertices onto the implicit surface. f should approximate a signed distance
// near the surface.
struct LatticeOptions {
    double h = 2.0;
    // Keep a tet when its centroid is inside (volume meshes) or when any of
    // its vertices is inside too (dilated; preserves sub-cell walls for
    // coarse class meshes).
    bool dilate = false;
    double max_projection = 1.05;  // fraction of h
    double min_kept_fraction = 0.98;  // smaller main component -> failure
};

TetMesh mesh_implicit(const std::function<double(const Vec3&)>& f, const Vec3& lo, const Vec3& hi,
                      const LatticeOptions& opt);

}  // namespace vloc
