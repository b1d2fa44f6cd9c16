#pragma once

#include <array>
#include <string>
#include <vector>

#include "vloc/mesh/geom.hpp"

namespace vloc {

// Indexed triangle surface with cached per-triangle areas.
// Invariants enforced by validate(): indices in range, all vertices finite,
// no degenerate triangles (area > 1e-9 mm^2).
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> tris;
    std::vector<double> areas;  // mm^2, rebuilt by update_areas()

    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_tris() const { return static_cast<int>(tris.size()); }

    void update_areas();
    double total_area() const;
    void validate() const;  // throws on violated invariants

    Vec3 tri_point(int t, double w0, double w1, double w2) const {
        const auto& tr = tris[static_cast<size_t>(t)];
        return w0 * vertices[tr[0]] + w1 * vertices[tr[1]] + w2 * vertices[tr[2]];
    }
    Vec3 tri_centroid(int t) const { return tri_point(t, 1.0 / 3, 1.0 / 3, 1.0 / 3); }
    Vec3 tri_normal(int t) const {
        const auto& tr = tris[static_cast<size_t>(t)];
        return triangle_normal(vertices[tr[0]], vertices[tr[1]], vertices[tr[2]]);
    }

    double mean_edge_length() const;

    // Unique undirected edges.
    std::vector<std::array<int, 2>> edges() const;

    // True when every edge is shared by exactly two triangles with opposite
    // winding (closed, consistently oriented, edge-manifold surface).
    bool is_closed_manifold() const;

    // Weaker: every directed edge is balanced by its reverse (boundary of a
    // solid; tolerates edge-pinches from lattice meshing).
    bool is_watertight() const;

    // V - E + F.
    int euler_characteristic() const;

    Vec3 centroid() const;

    // Volume enclosed by a closed, outward-oriented surface (divergence
    // theorem). Meaningless for open meshes.
    double enclosed_volume() const;
};

// Minimal ASCII PLY import (vertex x/y/z properties + faces); used for test
// fixtures only.
TriMesh read_ply_ascii(const std::string& text);

// Icosphere of given radius centered at c; each subdivision quadruples the
// triangle count (level 0 = icosahedron, 20 tris).
TriMesh make_icosphere(const Vec3& c, double radius, int subdivisions);

}  // namespace vloc
