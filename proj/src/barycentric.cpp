#include "vloc/mesh/barycentric.hpp"

#include <cmath>
#include <stdexcept>

namespace vloc {

std::array<double, 3> barycentric_coords(const Vec3& a, const Vec3& b, const Vec3& c,
                                         const Vec3& p) {
    const Vec3 e0 = b - a, e1 = c - a, ep = p - a;
    const double d00 = e0.dot(e0), d01 = e0.dot(e1), d11 = e1.dot(e1);
    const double det = d00 * d11 - d01 * d01;
    if (det <= 1e-18 || triangle_area(a, b, c) <= 1e-9)
        throw std::runtime_error("degenerate-triangle");
    const double dp0 = ep.dot(e0), dp1 = ep.dot(e1);
    const double w1 = (d11 * dp0 - d01 * dp1) / det;
    const double w2 = (d00 * dp1 - d01 * dp0) / det;
    return {1.0 - w1 - w2, w1, w2};
}

// Ericson, "Real-Time Collision Detection", closest point on triangle.
std::array<double, 3> closest_point_in_triangle(const Vec3& a, const Vec3& b, const Vec3& c,
                                                const Vec3& p) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) return {1, 0, 0};

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) return {0, 1, 0};

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) {
        const double v = d1 / (d1 - d3);
        return {1 - v, v, 0};
    }

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) return {0, 0, 1};

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) {
        const double w = d2 / (d2 - d6);
        return {1 - w, 0, w};
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return {0, 1 - w, w};
    }

    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom, w = vc * denom;
    return {1 - v - w, v, w};
}

BaryPoint nearest_surface_point(const TriMesh& surf, const Vec3& p) {
    if (surf.tris.empty()) throw std::runtime_error("nearest_surface_point: empty surface");
    BaryPoint best;
    double best_d = std::numeric_limits<double>::infinity();
    for (int t = 0; t < surf.n_tris(); ++t) {
        const auto& tr = surf.tris[static_cast<size_t>(t)];
        const auto w =
            closest_point_in_triangle(surf.vertices[tr[0]], surf.vertices[tr[1]], surf.vertices[tr[2]], p);
        const Vec3 q = w[0] * surf.vertices[tr[0]] + w[1] * surf.vertices[tr[1]] + w[2] * surf.vertices[tr[2]];
        const double d = (q - p).squaredNorm();
        if (d < best_d) {  // strict: lowest triangle index wins ties
            best_d = d;
            best.tri = t;
            best.w = w;
        }
    }
    return best;
}

}  // namespace vloc
