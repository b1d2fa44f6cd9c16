#pragma once

#include <array>

#include "vloc/mesh/trimesh.hpp"

namespace vloc {

// Point on a surface expressed in a triangle's barycentric frame.
// Invariant: weights >= 0 and sum to 1 (tolerance 1e-9).
struct BaryPoint {
    int tri = -1;
    std::array<double, 3> w = {0, 0, 0};

    Vec3 point(const TriMesh& m) const { return m.tri_point(tri, w[0], w[1], w[2]); }
};

// Barycentric coordinates of p in triangle (a,b,c). p is assumed to lie in
// the triangle's plane (callers project first); throws "degenerate-triangle"
// when the triangle has (near-)zero area.
std::array<double, 3> barycentric_coords(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& p);

// Closest point on triangle (a,b,c) to p, as barycentric weights (interior,
// edge or vertex).
std::array<double, 3> closest_point_in_triangle(const Vec3& a, const Vec3& b, const Vec3& c,
                                                const Vec3& p);

// Closest point on any triangle of the surface; ties broken toward the
// lowest triangle index.
BaryPoint nearest_surface_point(const TriMesh& surf, const Vec3& p);

}  // namespace vloc
