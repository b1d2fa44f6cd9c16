#include "vloc/heart/torso.hpp"

#include <cmath>
#include <stdexcept>

namespace vloc {

namespace {

double signed_pow(double v, double e) {
    return v >= 0 ? std::pow(v, e) : -std::pow(-v, e);
}

}  // namespace

Vec3 TorsoModel::section_point(double z, double u) const {
    const double t = z / height;
    const double a = half_width * profile(t);
    const double b = half_depth * profile(t);
    const double e = 2.0 / exponent;
    // u = 0 at the anterior midline (+y), increasing toward +x.
    const double x = a * signed_pow(std::sin(u), e);
    const double y = b * signed_pow(std::cos(u), e);
    return Vec3(x, y, z);
}

TorsoModel make_reference_torso(int n_theta, int n_rings) {
    if (n_theta < 8 || n_rings < 4) throw std::runtime_error("torso: mesh too coarse");
    TorsoModel torso;
    TriMesh& m = torso.surface;

    for (int r = 0; r < n_rings; ++r) {
        const double z = torso.height * static_cast<double>(r) / (n_rings - 1);
        for (int c = 0; c < n_theta; ++c) {
            const double u = 2.0 * M_PI * c / n_theta;
            m.vertices.push_back(torso.section_point(z, u));
        }
    }
    const int bottom_center = m.n_vertices();
    m.vertices.emplace_back(0, 0, 0);
    const int top_center = m.n_vertices();
    m.vertices.emplace_back(0, 0, torso.height);

    auto vid = [n_theta](int r, int c) { return r * n_theta + (c % n_theta); };
    for (int r = 0; r + 1 < n_rings; ++r) {
        for (int c = 0; c < n_theta; ++c) {
            const int a = vid(r, c), b = vid(r, c + 1), d = vid(r + 1, c), e = vid(r + 1, c + 1);
            m.tris.push_back({a, b, e});
            m.tris.push_back({a, e, d});
        }
    }
    for (int c = 0; c < n_theta; ++c) {
        m.tris.push_back({bottom_center, vid(0, c + 1), vid(0, c)});
        m.tris.push_back({top_center, vid(n_rings - 1, c), vid(n_rings - 1, c + 1)});
    }
    m.update_areas();

    // Orient outward.
    if (m.enclosed_volume() < 0) {
        for (auto& t : m.tris) std::swap(t[1], t[2]);
        m.update_areas();
    }
    m.validate();
    if (!m.is_closed_manifold()) throw std::runtime_error("torso: surface not closed");
    return torso;
}

bool ray_mesh_intersect(const TriMesh& mesh, const Vec3& origin, const Vec3& dir, double& t_hit,
                        int* tri_hit) {
    // Moller-Trumbore over all triangles; meshes here are small enough that
    // no acceleration structure is warranted.
    double best = std::numeric_limits<double>::infinity();
    int best_tri = -1;
    for (int t = 0; t < mesh.n_tris(); ++t) {
        const auto& tr = mesh.tris[static_cast<size_t>(t)];
        const Vec3& v0 = mesh.vertices[tr[0]];
        const Vec3 e1 = mesh.vertices[tr[1]] - v0;
        const Vec3 e2 = mesh.vertices[tr[2]] - v0;
        const Vec3 pvec = dir.cross(e2);
        const double det = e1.dot(pvec);
        if (std::abs(det) < 1e-12) continue;
        const double inv_det = 1.0 / det;
        const Vec3 tvec = origin - v0;
        const double u = tvec.dot(pvec) * inv_det;
        if (u < -1e-9 || u > 1.0 + 1e-9) continue;
        const Vec3 qvec = tvec.cross(e1);
        const double v = dir.dot(qvec) * inv_det;
        if (v < -1e-9 || u + v > 1.0 + 1e-9) continue;
        const double tt = e2.dot(qvec) * inv_det;
        if (tt > 1e-9 && tt < best) {
            best = tt;
            best_tri = t;
        }
    }
    if (best_tri < 0) return false;
    t_hit = best;
    if (tri_hit) *tri_hit = best_tri;
    return true;
}

bool point_inside_mesh(const TriMesh& mesh, const Vec3& p) {
    // Parity along an irrational direction to dodge edge-grazing rays.
    const Vec3 dir = Vec3(0.57735026919, 0.301511344578, 0.762000762001).normalized();
    int crossings = 0;
    Vec3 origin = p;
    double t;
    int tri;
    while (ray_mesh_intersect(mesh, origin, dir, t, &tri)) {
        ++crossings;
        origin = origin + (t + 1e-7) * dir;
        if (crossings > 1000) throw std::runtime_error("point_inside_mesh: degenerate ray");
    }
    return (crossings % 2) == 1;
}

}  // namespace vloc
