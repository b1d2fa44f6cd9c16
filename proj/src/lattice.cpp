#include "vloc/heart/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace vloc {

namespace {

// Kuhn subdivision: 6 tets per cube around the 0->7 diagonal, corner index
// bits = x + 2y + 4z. Translation-invariant, hence face-compatible across
// neighboring cubes.
constexpr int kKuhnTets[6][4] = {{0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7},
                                 {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7}};

constexpr int kFaceOrder[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};

struct Face64 {
    std::array<int64_t, 3> s;
    bool operator==(const Face64& o) const { return s == o.s; }
};
struct Face64Hash {
    size_t operator()(const Face64& f) const {
        uint64_t h = 0xcbf29ce484222325ull;
        for (int64_t v : f.s) {
            h ^= static_cast<uint64_t>(v);
            h *= 0x100000001b3ull;
        }
        return static_cast<size_t>(h);
    }
};
struct Edge64 {
    std::array<int64_t, 2> s;
    bool operator==(const Edge64& o) const { return s == o.s; }
};
struct Edge64Hash {
    size_t operator()(const Edge64& e) const {
        return static_cast<size_t>(Rng_mix(static_cast<uint64_t>(e.s[0]) * 0x9e3779b97f4a7c15ull ^
                                           static_cast<uint64_t>(e.s[1])));
    }
    static uint64_t Rng_mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
};

Face64 face64(int64_t a, int64_t b, int64_t c) {
    std::array<int64_t, 3> s = {a, b, c};
    std::sort(s.begin(), s.end());
    return {s};
}
Edge64 edge64(int64_t a, int64_t b) {
    if (a > b) std::swap(a, b);
    return {{a, b}};
}

// Lattice bookkeeping shared by the repair passes.
struct LatticeGrid {
    Vec3 lo;
    double h;
    int nx, ny, nz;        // cells
    int vx, vy, vz;        // grid vertices

    Vec3 point(int64_t gid) const {
        const int i = static_cast<int>(gid % vx);
        const int j = static_cast<int>((gid / vx) % vy);
        const int k = static_cast<int>(gid / (static_cast<int64_t>(vx) * vy));
        return Vec3(lo.x() + i * h, lo.y() + j * h, lo.z() + k * h);
    }
    int64_t gid(int i, int j, int k) const {
        return (static_cast<int64_t>(k) * vy + j) * vx + i;
    }
    int64_t n_cells() const { return static_cast<int64_t>(nx) * ny * nz; }

    // Grid-vertex ids of lattice tet t (= cell * 6 + corner-pattern index).
    std::array<int64_t, 4> tet_verts(int64_t t) const {
        const int64_t cell = t / 6;
        const int pat = static_cast<int>(t % 6);
        const int ci = static_cast<int>(cell % nx);
        const int cj = static_cast<int>((cell / nx) % ny);
        const int ck = static_cast<int>(cell / (static_cast<int64_t>(nx) * ny));
        std::array<int64_t, 4> out;
        for (int m = 0; m < 4; ++m) {
            const int b = kKuhnTets[pat][m];
            out[m] = gid(ci + (b & 1), cj + ((b >> 1) & 1), ck + ((b >> 2) & 1));
        }
        return out;
    }
    Vec3 tet_centroid(int64_t t) const {
        const auto v = tet_verts(t);
        return 0.25 * (point(v[0]) + point(v[1]) + point(v[2]) + point(v[3]));
    }

    // All lattice tets incident to a grid vertex (up to 8 cells x 6).
    void tets_around_vertex(int64_t g, std::vector<int64_t>& out) const {
        out.clear();
        const int i = static_cast<int>(g % vx);
        const int j = static_cast<int>((g / vx) % vy);
        const int k = static_cast<int>(g / (static_cast<int64_t>(vx) * vy));
        for (int dk = -1; dk <= 0; ++dk)
            for (int dj = -1; dj <= 0; ++dj)
                for (int di = -1; di <= 0; ++di) {
                    const int ci = i + di, cj = j + dj, ck = k + dk;
                    if (ci < 0 || cj < 0 || ck < 0 || ci >= nx || cj >= ny || ck >= nz) continue;
                    const int64_t cell = (static_cast<int64_t>(ck) * ny + cj) * nx + ci;
                    for (int p = 0; p < 6; ++p) {
                        const int64_t t = cell * 6 + p;
                        const auto tv = tet_verts(t);
                        if (std::find(tv.begin(), tv.end(), g) != tv.end()) out.push_back(t);
                    }
                }
    }
};

}  // namespace

TetMesh mesh_implicit(const std::function<double(const Vec3&)>& f, const Vec3& lo, const Vec3& hi,
                      const LatticeOptions& opt) {
    if (opt.h <= 0) throw std::runtime_error("lattice: resolution must be > 0");
    LatticeGrid grid;
    grid.lo = lo;
    grid.h = opt.h;
    grid.nx = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / opt.h)));
    grid.ny = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / opt.h)));
    grid.nz = std::max(1, static_cast<int>(std::ceil((hi.z() - lo.z()) / opt.h)));
    grid.vx = grid.nx + 1;
    grid.vy = grid.ny + 1;
    grid.vz = grid.nz + 1;

    // Initial keep set.
    std::unordered_set<int64_t> kept;
    {
        std::vector<char> corner_inside;
        if (opt.dilate) {
            corner_inside.assign(static_cast<size_t>(grid.vx) * grid.vy * grid.vz, 0);
            for (int k = 0; k < grid.vz; ++k)
                for (int j = 0; j < grid.vy; ++j)
                    for (int i = 0; i < grid.vx; ++i) {
                        const int64_t g = grid.gid(i, j, k);
                        corner_inside[static_cast<size_t>(g)] = f(grid.point(g)) <= 0.0;
                    }
        }
        for (int64_t t = 0; t < grid.n_cells() * 6; ++t) {
            bool keep = f(grid.tet_centroid(t)) <= 0.0;
            if (!keep && opt.dilate) {
                for (const int64_t g : grid.tet_verts(t)) {
                    if (corner_inside[static_cast<size_t>(g)]) {
                        keep = true;
                        break;
                    }
                }
            }
            if (keep) kept.insert(t);
        }
    }
    if (kept.empty()) throw std::runtime_error("lattice: empty region");

    // Largest face-connected component.
    {
        std::unordered_map<Face64, std::array<int64_t, 2>, Face64Hash> face_tets;
        face_tets.reserve(kept.size() * 2);
        for (const int64_t t : kept) {
            const auto v = grid.tet_verts(t);
            for (const auto& fo : kFaceOrder) {
                auto [it, ins] =
                    face_tets.emplace(face64(v[fo[0]], v[fo[1]], v[fo[2]]), std::array<int64_t, 2>{t, -1});
                if (!ins) it->second[1] = t;
            }
        }
        std::unordered_map<int64_t, int64_t> comp;
        comp.reserve(kept.size());
        std::unordered_map<int64_t, std::vector<int64_t>> adj;
        adj.reserve(kept.size());
        for (const auto& [key, pair] : face_tets) {
            if (pair[1] >= 0) {
                adj[pair[0]].push_back(pair[1]);
                adj[pair[1]].push_back(pair[0]);
            }
        }
        int64_t best_root = -1;
        size_t best_size = 0;
        for (const int64_t seed : kept) {
            if (comp.count(seed)) continue;
            std::queue<int64_t> q;
            q.push(seed);
            comp[seed] = seed;
            size_t size = 0;
            while (!q.empty()) {
                const int64_t u = q.front();
                q.pop();
                ++size;
                auto it = adj.find(u);
                if (it == adj.end()) continue;
                for (const int64_t v : it->second) {
                    if (!comp.count(v)) {
                        comp[v] = seed;
                        q.push(v);
                    }
                }
            }
            if (size > best_size) {
                best_size = size;
                best_root = seed;
            }
        }
        if (best_size < opt.min_kept_fraction * static_cast<double>(kept.size()))
            throw std::runtime_error("invalid-shape: fragmented region");
        std::unordered_set<int64_t> main_comp;
        main_comp.reserve(best_size);
        for (const int64_t t : kept)
            if (comp[t] == best_root) main_comp.insert(t);
        kept = std::move(main_comp);
    }

    // Pinch repair: fill unkept lattice tets at non-manifold boundary edges
    // and vertices until the boundary is a 2-manifold.
    std::vector<int64_t> scratch;
    constexpr int kMaxRepairPasses = 60;
    for (int pass = 0; pass < kMaxRepairPasses; ++pass) {
        // Boundary faces of the kept set.
        std::unordered_map<Face64, int, Face64Hash> face_count;
        face_count.reserve(kept.size() * 2);
        for (const int64_t t : kept) {
            const auto v = grid.tet_verts(t);
            for (const auto& fo : kFaceOrder) ++face_count[face64(v[fo[0]], v[fo[1]], v[fo[2]])];
        }
        std::vector<Face64> bfaces;
        for (const auto& [key, n] : face_count)
            if (n == 1) bfaces.push_back(key);

        size_t added = 0;
        auto try_fill = [&](int64_t ga, int64_t gb, bool need_both) {
            // Best unkept lattice tet containing the edge (ga,gb) or vertex ga.
            int64_t best = -1;
            double best_f = 1e300;
            grid.tets_around_vertex(ga, scratch);
            for (const int64_t t : scratch) {
                if (kept.count(t)) continue;
                if (need_both) {
                    const auto tv = grid.tet_verts(t);
                    if (std::find(tv.begin(), tv.end(), gb) == tv.end()) continue;
                }
                const double fc = f(grid.tet_centroid(t));
                if (fc < best_f) {
                    best_f = fc;
                    best = t;
                }
            }
            if (best >= 0) {
                kept.insert(best);
                ++added;
            }
        };

        // Edge pinches.
        std::unordered_map<Edge64, int, Edge64Hash> edge_count;
        edge_count.reserve(bfaces.size() * 2);
        for (const auto& bf : bfaces) {
            edge_count[edge64(bf.s[0], bf.s[1])]++;
            edge_count[edge64(bf.s[1], bf.s[2])]++;
            edge_count[edge64(bf.s[0], bf.s[2])]++;
        }
        for (const auto& [e, n] : edge_count)
            if (n > 2) try_fill(e.s[0], e.s[1], true);

        {
            // Vertex pinches: boundary faces around a vertex must form one
            // edge-connected fan.
            std::unordered_map<int64_t, std::vector<int>> vert_faces;
            for (int fi = 0; fi < static_cast<int>(bfaces.size()); ++fi)
                for (const int64_t g : bfaces[static_cast<size_t>(fi)].s) vert_faces[g].push_back(fi);
            for (const auto& [g, faces] : vert_faces) {
                if (faces.size() < 2) continue;
                // Union-find over this vertex's faces via shared edges.
                std::unordered_map<Edge64, int, Edge64Hash> edge_face;
                std::vector<int> parent(faces.size());
                for (size_t i = 0; i < faces.size(); ++i) parent[i] = static_cast<int>(i);
                std::function<int(int)> find = [&](int x) {
                    while (parent[static_cast<size_t>(x)] != x) x = parent[static_cast<size_t>(x)] =
                        parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
                    return x;
                };
                for (size_t i = 0; i < faces.size(); ++i) {
                    const auto& bf = bfaces[static_cast<size_t>(faces[i])];
                    for (int m = 0; m < 3; ++m) {
                        if (bf.s[static_cast<size_t>(m)] == g) continue;
                        const Edge64 e = edge64(g, bf.s[static_cast<size_t>(m)]);
                        auto [it, ins] = edge_face.emplace(e, static_cast<int>(i));
                        if (!ins) {
                            const int ra = find(it->second), rb = find(static_cast<int>(i));
                            if (ra != rb) parent[static_cast<size_t>(ra)] = rb;
                        }
                    }
                }
                int n_comp = 0;
                for (size_t i = 0; i < faces.size(); ++i) n_comp += find(static_cast<int>(i)) == static_cast<int>(i);
                if (n_comp > 1) try_fill(g, g, false);
            }
        }
        if (getenv("VLOC_LATTICE_DEBUG"))
            fprintf(stderr, "lattice pass %d: added %zu (kept %zu)\n", pass, added, kept.size());
        if (added == 0) break;
        if (pass == kMaxRepairPasses - 1)
            throw std::runtime_error("invalid-shape: nonmanifold boundary");
    }

    // Compact to a TetMesh.
    TetMesh mesh;
    {
        std::vector<int64_t> order(kept.begin(), kept.end());
        std::sort(order.begin(), order.end());  // deterministic numbering
        std::unordered_map<int64_t, int> remap;
        remap.reserve(order.size());
        mesh.tets.reserve(order.size());
        for (const int64_t t : order) {
            const auto v = grid.tet_verts(t);
            std::array<int, 4> tet;
            for (int m = 0; m < 4; ++m) {
                auto [it, ins] = remap.emplace(v[m], static_cast<int>(mesh.vertices.size()));
                if (ins) mesh.vertices.push_back(grid.point(v[m]));
                tet[m] = it->second;
            }
            mesh.tets.push_back(tet);
        }
    }

    mesh.orient_positive();
    mesh.extract_boundary();

    // Project boundary vertices onto f = 0 along the numeric gradient.
    std::vector<char> on_boundary(mesh.vertices.size(), 0);
    for (const auto& bf : mesh.boundary)
        for (int m = 0; m < 3; ++m) on_boundary[static_cast<size_t>(bf.verts[m])] = 1;

    const std::vector<Vec3> original = mesh.vertices;
    const double gh = 0.25 * opt.h;
    for (size_t v = 0; v < mesh.vertices.size(); ++v) {
        if (!on_boundary[v]) continue;
        const Vec3 p = mesh.vertices[v];
        const double f0 = f(p);
        Vec3 g;
        for (int k = 0; k < 3; ++k) {
            Vec3 d = Vec3::Zero();
            d[k] = gh;
            g[k] = f(p + d) - f(p - d);
        }
        if (g.norm() < 1e-12) continue;
        g.normalize();
        const Vec3 dir = f0 > 0 ? Vec3(-g) : g;
        double t_lo = 0.0, t_hi = 0.0;
        bool bracketed = false;
        const double step = 0.2 * opt.h, t_max = opt.max_projection * opt.h;
        for (double t = step; t <= t_max + 1e-12; t += step) {
            if (f(p + t * dir) * f0 <= 0.0) {
                t_hi = t;
                t_lo = t - step;
                bracketed = true;
                break;
            }
        }
        if (!bracketed) continue;
        for (int it = 0; it < 30; ++it) {
            const double mid = 0.5 * (t_lo + t_hi);
            (f(p + mid * dir) * f0 > 0.0 ? t_lo : t_hi) = mid;
        }
        mesh.vertices[v] = p + 0.5 * (t_lo + t_hi) * dir;
    }

    // Degeneracy guard: revert projected vertices of non-positive tets and of
    // sliver boundary faces until a fixpoint (reverts are monotone, so this
    // terminates; the original lattice positions are always valid).
    const double min_face_area = 1e-4 * opt.h * opt.h;
    while (true) {
        bool any_reverted = false;
        auto revert = [&](int vi) {
            if (on_boundary[static_cast<size_t>(vi)] &&
                (mesh.vertices[static_cast<size_t>(vi)] - original[static_cast<size_t>(vi)])
                        .squaredNorm() > 0) {
                mesh.vertices[static_cast<size_t>(vi)] = original[static_cast<size_t>(vi)];
                any_reverted = true;
            }
        };
        for (const auto& q : mesh.tets) {
            if (tet_signed_volume(mesh.vertices[q[0]], mesh.vertices[q[1]], mesh.vertices[q[2]],
                                  mesh.vertices[q[3]]) > 1e-9)
                continue;
            for (int m = 0; m < 4; ++m) revert(q[m]);
        }
        for (const auto& bf : mesh.boundary) {
            if (triangle_area(mesh.vertices[bf.verts[0]], mesh.vertices[bf.verts[1]],
                              mesh.vertices[bf.verts[2]]) > min_face_area)
                continue;
            for (int m = 0; m < 3; ++m) revert(bf.verts[m]);
        }
        if (!any_reverted) break;
    }

    mesh.validate();
    return mesh;
}

}  // namespace vloc
