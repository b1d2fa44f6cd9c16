#pragma once

#include "vloc/mesh/trimesh.hpp"

namespace vloc {

// Fixed analytic torso: superellipse cross-sections lofted along z, closed
// with flat caps. +y is anterior (chest), +x is the patient's left, z runs
// hips (0) to shoulders (height).
struct TorsoModel {
    TriMesh surface;
    double height = 480.0;
    double half_width = 165.0;   // lateral (x) at the widest ring
    double half_depth = 105.0;   // anterior-posterior (y)
    double exponent = 2.5;       // superellipse exponent

    double profile(double t) const {  // relative width at t = z/height
        return 0.84 + 0.64 * t * (1.0 - t);
    }
    // Cross-section point at height z and superellipse parameter u.
    Vec3 section_point(double z, double u) const;
    Vec3 centroid() const { return Vec3(0, 0, 0.5 * height); }

    // Electrode band and baseline heart anchor (fractions of height).
    double band_lo = 0.40, band_hi = 0.66;
    double heart_z_frac = 0.53;
};

TorsoModel make_reference_torso(int n_theta = 30, int n_rings = 24);

// First intersection of the ray origin + t*dir (t > 0) with the mesh;
// returns false when the ray misses.
bool ray_mesh_intersect(const TriMesh& mesh, const Vec3& origin, const Vec3& dir, double& t_hit,
                        int* tri_hit = nullptr);

// Parity test along a fixed ray direction; surface must be closed.
bool point_inside_mesh(const TriMesh& mesh, const Vec3& p);

}  // namespace vloc
