#include "vloc/labels/vent_coords.hpp"

#include <cmath>
#include <stdexcept>

namespace vloc {

void VentCoord::validate() const {
    if (v != 0.0 && v != 1.0) throw std::runtime_error("vent coord: v must be binary");
    if (m != 0.0 && m != 1.0) throw std::runtime_error("vent coord: m must be binary");
    if (a < 0.0 || a > 1.0) throw std::runtime_error("vent coord: a outside [0,1]");
    if (std::abs(r_sin * r_sin + r_cos * r_cos - 1.0) > 1e-6)
        throw std::runtime_error("vent coord: (sin,cos) not on the unit circle");
}

VentCoord encode_origin_coords(const CoordSurface& surf, const BaryPoint& origin) {
    if (origin.tri < 0 || origin.tri >= surf.mesh.n_tris())
        throw std::runtime_error("encode_origin_coords: origin not on the surface");
    if (surf.tri_v.empty() || surf.a.empty())
        throw std::runtime_error("encode_origin_coords: surface carries no labels");
    const auto& tri = surf.mesh.tris[static_cast<size_t>(origin.tri)];
    VentCoord c;
    c.v = surf.tri_v[static_cast<size_t>(origin.tri)];
    c.m = surf.tri_m[static_cast<size_t>(origin.tri)];
    double a = 0, s = 0, co = 0;
    for (int k = 0; k < 3; ++k) {
        const double w = origin.w[static_cast<size_t>(k)];
        a += w * surf.a[static_cast<size_t>(tri[k])];
        s += w * surf.rsin[static_cast<size_t>(tri[k])];
        co += w * surf.rcos[static_cast<size_t>(tri[k])];
    }
    c.a = std::clamp(a, 0.0, 1.0);
    const double norm = std::sqrt(s * s + co * co);
    if (norm < 1e-9) {
        c.r_sin = 0;
        c.r_cos = 1;  // antipodal interpolation degeneracy; pick the branch cut
    } else {
        c.r_sin = s / norm;
        c.r_cos = co / norm;
    }
    return c;
}

namespace {

struct Metric {
    double wa, wr;
    double a, s, c;

    double at(double av, double sv, double cv) const {
        const double da = av - a, ds = sv - s, dc = cv - c;
        return wa * da * da + wr * (ds * ds + dc * dc);
    }
};

}  // namespace

SurfacePoint coords_to_point(const VentCoord& c, const CoordSurface& target) {
    const uint8_t want_v = c.v >= 0.5 ? 1 : 0;
    const uint8_t want_m = c.m >= 0.5 ? 1 : 0;
    const Metric metric{6.25, std::max(0.0, c.a), c.a, c.r_sin, c.r_cos};

    // Best vertex over eligible triangles, then continuous refinement in the
    // triangles around it.
    int best_tri = -1;
    int best_corner = -1;
    double best_d = 1e300;
    for (int t = 0; t < target.mesh.n_tris(); ++t) {
        if (target.tri_v[static_cast<size_t>(t)] != want_v ||
            target.tri_m[static_cast<size_t>(t)] != want_m)
            continue;
        const auto& tr = target.mesh.tris[static_cast<size_t>(t)];
        for (int k = 0; k < 3; ++k) {
            const size_t vi = static_cast<size_t>(tr[k]);
            const double d = metric.at(target.a[vi], target.rsin[vi], target.rcos[vi]);
            if (d < best_d) {
                best_d = d;
                best_tri = t;
                best_corner = k;
            }
        }
    }
    if (best_tri < 0) throw std::runtime_error("empty matching surface");
    const int pivot_vertex = target.mesh.tris[static_cast<size_t>(best_tri)][best_corner];

    SurfacePoint out;
    double best_ref = 1e300;
    for (int t = 0; t < target.mesh.n_tris(); ++t) {
        if (target.tri_v[static_cast<size_t>(t)] != want_v ||
            target.tri_m[static_cast<size_t>(t)] != want_m)
            continue;
        const auto& tr = target.mesh.tris[static_cast<size_t>(t)];
        if (tr[0] != pivot_vertex && tr[1] != pivot_vertex && tr[2] != pivot_vertex) continue;

        // Quadratic in the barycentric pair (l1, l2): fields are linear over
        // the triangle. Minimize over the simplex: interior stationary point,
        // then the three clamped edges.
        Eigen::Vector3d fa, fs, fc;
        for (int k = 0; k < 3; ++k) {
            const size_t vi = static_cast<size_t>(tr[k]);
            fa[k] = target.a[vi];
            fs[k] = target.rsin[vi];
            fc[k] = target.rcos[vi];
        }
        auto value = [&](double l1, double l2) {
            const double l0 = 1.0 - l1 - l2;
            return metric.at(l0 * fa[0] + l1 * fa[1] + l2 * fa[2],
                             l0 * fs[0] + l1 * fs[1] + l2 * fs[2],
                             l0 * fc[0] + l1 * fc[1] + l2 * fc[2]);
        };
        double cand_l1 = 0, cand_l2 = 0, cand_val = value(0, 0);
        auto consider = [&](double l1, double l2) {
            if (l1 < 0 || l2 < 0 || l1 + l2 > 1) return;
            const double v = value(l1, l2);
            if (v < cand_val) {
                cand_val = v;
                cand_l1 = l1;
                cand_l2 = l2;
            }
        };
        // Stationary point of the quadratic via its normal equations.
        {
            Eigen::Matrix2d H;
            Eigen::Vector2d g;
            // gradients of the linear fields w.r.t. (l1, l2)
            const Eigen::Vector2d da(fa[1] - fa[0], fa[2] - fa[0]);
            const Eigen::Vector2d ds(fs[1] - fs[0], fs[2] - fs[0]);
            const Eigen::Vector2d dc(fc[1] - fc[0], fc[2] - fc[0]);
            H = 2.0 * (metric.wa * da * da.transpose() + metric.wr * ds * ds.transpose() +
                       metric.wr * dc * dc.transpose());
            const double ra = fa[0] - metric.a, rs = fs[0] - metric.s, rc = fc[0] - metric.c;
            g = 2.0 * (metric.wa * ra * da + metric.wr * rs * ds + metric.wr * rc * dc);
            if (std::abs(H.determinant()) > 1e-14) {
                const Eigen::Vector2d l = H.ldlt().solve(-g);
                consider(l[0], l[1]);
            }
        }
        // Edges of the simplex (1-D quadratics sampled at their clamped
        // minimizer via golden-section-free closed form).
        auto edge = [&](double a1, double b1, double a2, double b2) {
            // parameterize (l1,l2) = (a1,b1) + t[(a2,b2)-(a1,b1)], t in [0,1]
            const double va = value(a1, b1), vb = value(a2, b2), vm = value(0.5 * (a1 + a2), 0.5 * (b1 + b2));
            // fit quadratic through t=0,0.5,1: v(t) = va + (4vm-3va-vb) t + 2(va+vb-2vm) t^2
            const double qa = 2.0 * (va + vb - 2.0 * vm);
            const double qb = 4.0 * vm - 3.0 * va - vb;
            double t = 0.5;
            if (std::abs(qa) > 1e-14) t = std::clamp(-qb / (2.0 * qa), 0.0, 1.0);
            consider(a1 + t * (a2 - a1), b1 + t * (b2 - b1));
            consider(a1, b1);
            consider(a2, b2);
        };
        edge(0, 0, 1, 0);
        edge(0, 0, 0, 1);
        edge(1, 0, 0, 1);

        if (cand_val < best_ref) {
            best_ref = cand_val;
            out.bary.tri = t;
            out.bary.w = {1.0 - cand_l1 - cand_l2, cand_l1, cand_l2};
        }
    }
    out.point = out.bary.point(target.mesh);
    return out;
}

}  // namespace vloc
