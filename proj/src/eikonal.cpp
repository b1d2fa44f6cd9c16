#include "vloc/eik/eikonal.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace vloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Symmetric 3x3 travel-time metric M = ff^T / v_f^2 + (I - ff^T) / v_t^2,
// so that |d|_M = sqrt(d^T M d) is the anisotropic travel time of a straight
// segment d.
struct Metric {
    double m[6];  // xx, yy, zz, xy, xz, yz

    static Metric from_fiber(const Vec3& f, double v_f, double v_t) {
        const double a = 1.0 / (v_f * v_f), b = 1.0 / (v_t * v_t);
        Metric M;
        M.m[0] = b + (a - b) * f.x() * f.x();
        M.m[1] = b + (a - b) * f.y() * f.y();
        M.m[2] = b + (a - b) * f.z() * f.z();
        M.m[3] = (a - b) * f.x() * f.y();
        M.m[4] = (a - b) * f.x() * f.z();
        M.m[5] = (a - b) * f.y() * f.z();
        return M;
    }

    double quad(const Vec3& u, const Vec3& v) const {
        return m[0] * u.x() * v.x() + m[1] * u.y() * v.y() + m[2] * u.z() * v.z() +
               m[3] * (u.x() * v.y() + u.y() * v.x()) + m[4] * (u.x() * v.z() + u.z() * v.x()) +
               m[5] * (u.y() * v.z() + u.z() * v.y());
    }
    double norm(const Vec3& u) const { return std::sqrt(std::max(0.0, quad(u, u))); }
};

// 1-D subproblem along the segment p..q with times tp, tq, target vertex v.
double solve_edge(const Vec3& v, const Vec3& p, const Vec3& q, double tp, double tq,
                  const Metric& M) {
    const Vec3 e = q - p, c = v - p;
    const double A = M.quad(e, e), B = M.quad(e, c), C = M.quad(c, c);
    const double dt = tq - tp;
    double best = std::min(tp + std::sqrt(std::max(0.0, C)), tq + M.norm(v - q));
    if (A <= 1e-14) return best;
    const double den = 1.0 - dt * dt / A;
    const double num = C - B * B / A;
    if (den > 1e-12 && num >= 0.0) {
        const double s = std::sqrt(num / den);
        const double mu = (B - dt * s) / A;
        if (mu > 0.0 && mu < 1.0) {
            const Vec3 w = c - mu * e;
            best = std::min(best, tp + mu * dt + M.norm(w));
        }
    }
    return best;
}

// 2-D subproblem over the face (p0,p1,p2) with times t0..t2.
double solve_face(const Vec3& v, const Vec3& p0, const Vec3& p1, const Vec3& p2, double t0,
                  double t1, double t2, const Metric& M) {
    const Vec3 e1 = p1 - p0, e2 = p2 - p0, d = v - p0;
    const double g11 = M.quad(e1, e1), g12 = M.quad(e1, e2), g22 = M.quad(e2, e2);
    const double det = g11 * g22 - g12 * g12;
    double best = kInf;
    if (det > 1e-14) {
        const double i11 = g22 / det, i12 = -g12 / det, i22 = g11 / det;
        const double b1 = M.quad(e1, d), b2 = M.quad(e2, d);
        const double a1 = t1 - t0, a2 = t2 - t0;
        const double alpha = a1 * (i11 * a1 + i12 * a2) + a2 * (i12 * a1 + i22 * a2);
        const double gamma = b1 * (i11 * b1 + i12 * b2) + b2 * (i12 * b1 + i22 * b2);
        const double dMd = M.quad(d, d);
        const double den = 1.0 - alpha, num = dMd - gamma;
        if (den > 1e-12 && num >= 0.0) {
            const double s = std::sqrt(num / den);
            const double r1 = b1 - a1 * s, r2 = b2 - a2 * s;
            const double l1 = i11 * r1 + i12 * r2;
            const double l2 = i12 * r1 + i22 * r2;
            if (l1 >= -1e-12 && l2 >= -1e-12 && l1 + l2 <= 1.0 + 1e-12)
                best = t0 + a1 * l1 + a2 * l2 + s;
        }
    }
    // Simplex boundary.
    best = std::min(best, solve_edge(v, p0, p1, t0, t1, M));
    best = std::min(best, solve_edge(v, p0, p2, t0, t2, M));
    best = std::min(best, solve_edge(v, p1, p2, t1, t2, M));
    return best;
}

}  // namespace

void ConductionParams::validate() const {
    if (v_fiber <= 0) throw std::runtime_error("conduction: v_fiber must be > 0");
    if (anisotropy_ratio < 1.0) throw std::runtime_error("conduction: ratio must be >= 1");
}

void AugmentParams::validate() const {
    if (cv_scale < 0.5 || cv_scale > 1.5)
        throw std::runtime_error("augment: cv_scale outside [0.5,1.5]");
    if (shift_ms < 0.0 || shift_ms > 100.0)
        throw std::runtime_error("augment: shift outside [0,100] ms");
}

double ATMap::min_at() const { return *std::min_element(at.begin(), at.end()); }
double ATMap::max_at() const { return *std::max_element(at.begin(), at.end()); }

ATMap solve_eikonal(const HeartModel& heart, const ConductionParams& params,
                    const BaryPoint& origin, const EikonalOptions& opt) {
    params.validate();
    if (heart.fibers.size() != heart.tet.tets.size())
        throw std::runtime_error("solve_eikonal: fibers not assigned");
    if (origin.tri < 0 || origin.tri >= heart.surf.mesh.n_tris())
        throw std::runtime_error("solve_eikonal: origin not on the heart surface");

    const TetMesh& mesh = heart.tet;
    const size_t nv = mesh.vertices.size();
    const double v_f = params.v_fiber;
    const double v_t = params.v_fiber / params.anisotropy_ratio;

    std::vector<Metric> metric(mesh.tets.size());
    for (size_t t = 0; t < mesh.tets.size(); ++t)
        metric[t] = Metric::from_fiber(heart.fibers[t], v_f, v_t);

    std::vector<int> toff, tinc;
    mesh.vertex_tet_adjacency(toff, tinc);

    std::vector<double> at(nv, kInf);

    // Seed the origin triangle's vertices with their metric distance to the
    // origin point, using each vertex's best incident-tet metric.
    const Vec3 origin_pt = origin.point(heart.surf.mesh);
    std::vector<int> seeds;
    for (int k = 0; k < 3; ++k) {
        const int sv =
            heart.surf_vertex_map[static_cast<size_t>(heart.surf.mesh.tris[static_cast<size_t>(origin.tri)][k])];
        double best = kInf;
        for (int j = toff[static_cast<size_t>(sv)]; j < toff[static_cast<size_t>(sv) + 1]; ++j)
            best = std::min(best, metric[static_cast<size_t>(tinc[static_cast<size_t>(j)])].norm(
                                      mesh.vertices[static_cast<size_t>(sv)] - origin_pt));
        at[static_cast<size_t>(sv)] = best;
        seeds.push_back(sv);
    }

    auto recompute = [&](int v) {
        double best = kInf;
        const Vec3& pv = mesh.vertices[static_cast<size_t>(v)];
        for (int j = toff[static_cast<size_t>(v)]; j < toff[static_cast<size_t>(v) + 1]; ++j) {
            const int ti = tinc[static_cast<size_t>(j)];
            const auto& q = mesh.tets[static_cast<size_t>(ti)];
            int other[3], n_other = 0;
            for (int m = 0; m < 4; ++m)
                if (q[m] != v) other[n_other++] = q[m];
            const double t0 = at[static_cast<size_t>(other[0])];
            const double t1 = at[static_cast<size_t>(other[1])];
            const double t2 = at[static_cast<size_t>(other[2])];
            const Metric& M = metric[static_cast<size_t>(ti)];
            const Vec3 &p0 = mesh.vertices[static_cast<size_t>(other[0])],
                       &p1 = mesh.vertices[static_cast<size_t>(other[1])],
                       &p2 = mesh.vertices[static_cast<size_t>(other[2])];
            const bool f0 = std::isfinite(t0), f1 = std::isfinite(t1), f2 = std::isfinite(t2);
            double cand = kInf;
            if (f0 && f1 && f2) {
                cand = solve_face(pv, p0, p1, p2, t0, t1, t2, M);
            } else if (f0 && f1) {
                cand = solve_edge(pv, p0, p1, t0, t1, M);
            } else if (f0 && f2) {
                cand = solve_edge(pv, p0, p2, t0, t2, M);
            } else if (f1 && f2) {
                cand = solve_edge(pv, p1, p2, t1, t2, M);
            } else if (f0) {
                cand = t0 + M.norm(pv - p0);
            } else if (f1) {
                cand = t1 + M.norm(pv - p1);
            } else if (f2) {
                cand = t2 + M.norm(pv - p2);
            }
            best = std::min(best, cand);
        }
        return best;
    };

    // Vertex adjacency (via edges).
    std::vector<int> voff, vadj;
    {
        std::vector<std::array<int, 2>> edges;
        std::vector<double> lens;
        mesh.edge_graph(edges, lens);
        std::vector<int> counts(nv, 0);
        for (const auto& e : edges) {
            ++counts[static_cast<size_t>(e[0])];
            ++counts[static_cast<size_t>(e[1])];
        }
        voff.assign(nv + 1, 0);
        for (size_t i = 0; i < nv; ++i) voff[i + 1] = voff[i] + counts[i];
        vadj.assign(static_cast<size_t>(voff.back()), 0);
        std::vector<int> cur(voff.begin(), voff.end() - 1);
        for (const auto& e : edges) {
            vadj[static_cast<size_t>(cur[static_cast<size_t>(e[0])]++)] = e[1];
            vadj[static_cast<size_t>(cur[static_cast<size_t>(e[1])]++)] = e[0];
        }
    }

    std::deque<int> active;
    std::vector<char> in_active(nv, 0);
    for (int s : seeds) {
        if (!in_active[static_cast<size_t>(s)]) {
            active.push_back(s);
            in_active[static_cast<size_t>(s)] = 1;
        }
    }

    const long max_total = opt.max_updates_per_vertex * static_cast<long>(nv);
    long n_updates = 0;
    while (!active.empty()) {
        const int v = active.front();
        active.pop_front();
        if (++n_updates > max_total) throw std::runtime_error("eikonal-diverged");
        const double old = at[static_cast<size_t>(v)];
        const double fresh = std::min(old, recompute(v));
        at[static_cast<size_t>(v)] = fresh;
        if (old - fresh > opt.tolerance_ms) {
            active.push_back(v);  // still converging
            continue;
        }
        in_active[static_cast<size_t>(v)] = 0;
        for (int j = voff[static_cast<size_t>(v)]; j < voff[static_cast<size_t>(v) + 1]; ++j) {
            const int u = vadj[static_cast<size_t>(j)];
            if (in_active[static_cast<size_t>(u)]) continue;
            const double q = recompute(u);
            if (at[static_cast<size_t>(u)] - q > opt.tolerance_ms) {
                at[static_cast<size_t>(u)] = q;
                active.push_back(u);
                in_active[static_cast<size_t>(u)] = 1;
            }
        }
    }

    for (double t : at) {
        if (!std::isfinite(t)) throw std::runtime_error("eikonal-diverged");
    }

    ATMap out;
    out.at = std::move(at);
    out.origin = origin;
    out.origin_wall = heart.surf_tri_wall[static_cast<size_t>(origin.tri)];
    return out;
}

void augment_at(ATMap& at, const AugmentParams& aug) {
    aug.validate();
    for (double& v : at.at) v = v * aug.cv_scale + aug.shift_ms;
}

}  // namespace vloc
