#include "vloc/labels/coarse_mesh.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "vloc/core/binio.hpp"
#include "vloc/mesh/meshio.hpp"

namespace vloc {

using nlohmann::json;

std::vector<std::vector<int>> CoarseMesh::vertex_sharing_neighbors() const {
    std::vector<std::vector<int>> vert_tris(static_cast<size_t>(surf.mesh.n_vertices()));
    for (int t = 0; t < surf.mesh.n_tris(); ++t)
        for (int k = 0; k < 3; ++k)
            vert_tris[static_cast<size_t>(surf.mesh.tris[static_cast<size_t>(t)][k])].push_back(t);
    std::vector<std::vector<int>> out(static_cast<size_t>(surf.mesh.n_tris()));
    for (int t = 0; t < surf.mesh.n_tris(); ++t) {
        std::vector<int>& nb = out[static_cast<size_t>(t)];
        for (int k = 0; k < 3; ++k)
            for (int o : vert_tris[static_cast<size_t>(surf.mesh.tris[static_cast<size_t>(t)][k])])
                if (o != t) nb.push_back(o);
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    return out;
}

namespace {

// The coarse scaffold is built parametrically: lattice meshing cannot honor
// a 540-triangle budget on a shape with 3 mm walls, and decimation is out of
// scope. Patches are azimuthal grids (apex fans close the poles); the RV
// endo patch covers the free-wall sector of its ellipsoid.

struct PatchBuilder {
    CoordSurface* surf;
    const BiventricularShape* shape;

    int add_vertex(const Vec3& p) {
        surf->mesh.vertices.push_back(p);
        return static_cast<int>(surf->mesh.vertices.size()) - 1;
    }
    void add_tri(int a, int b, int c, uint8_t m_label, int v_label) {
        if (triangle_area(surf->mesh.vertices[static_cast<size_t>(a)],
                          surf->mesh.vertices[static_cast<size_t>(b)],
                          surf->mesh.vertices[static_cast<size_t>(c)]) < 1e-6)
            return;
        surf->mesh.tris.push_back({a, b, c});
        surf->tri_m.push_back(m_label);
        if (v_label >= 0) {
            surf->tri_v.push_back(static_cast<uint8_t>(v_label));
        } else {
            const Vec3 c3 = (surf->mesh.vertices[static_cast<size_t>(a)] +
                             surf->mesh.vertices[static_cast<size_t>(b)] +
                             surf->mesh.vertices[static_cast<size_t>(c)]) /
                            3.0;
            surf->tri_v.push_back(shape->rv_free_wall(c3) ? 1 : 0);
        }
    }
};

// Largest ray-exit radius of an axis-aligned ellipsoid from an interior-ish
// anchor point along dir; returns false when the ray misses.
bool ray_ellipsoid_exit(const Vec3& anchor, const Vec3& dir, const Vec3& center, const Vec3& ax,
                        double& t_exit) {
    const Vec3 o = anchor - center;
    double a = 0, b = 0, c = -1.0;
    for (int k = 0; k < 3; ++k) {
        a += dir[k] * dir[k] / (ax[k] * ax[k]);
        b += 2.0 * o[k] * dir[k] / (ax[k] * ax[k]);
        c += o[k] * o[k] / (ax[k] * ax[k]);
    }
    const double disc = b * b - 4 * a * c;
    if (disc < 0) return false;
    t_exit = (-b + std::sqrt(disc)) / (2 * a);
    return t_exit > 0;
}

CoarseMesh build_with_budget(const BiventricularShape& shape, const ShapeGeometry& geo,
                             double scale) {
    CoarseMesh cm;
    PatchBuilder pb{&cm.surf, &shape};

    const double zb0 = geo.base_frac * geo.lv_len;  // base height at x = 0
    auto base_z = [&](double x) {
        const double t = deg2rad(geo.tilt_deg);
        return zb0 - std::tan(t) * x;
    };

    // --- epi: star-shaped union of the two epi ellipsoids about the LV axis.
    {
        const int n_phi = std::max(8, static_cast<int>(std::lround(13 * scale)));
        const int n_s = std::max(4, static_cast<int>(std::lround(7 * scale)));
        const Vec3 lv_ax(geo.lv_ra + geo.wall_lat, geo.lv_rb + geo.wall_lat,
                         geo.lv_len + geo.wall_apex);
        const Vec3 rv_c(geo.rv_dx, 0, geo.rv_dz);
        const Vec3 rv_ax = geo.rv_scale * Vec3(1.04 * lv_ax.x(), geo.rv_wrap * lv_ax.y(), 0.88 * lv_ax.z());
        const Vec3 apex(0, 0, -lv_ax.z());
        const Vec3 anchor(0, 0, 0.35 * -lv_ax.z());  // interior anchor on the axis

        std::vector<std::vector<int>> ring(static_cast<size_t>(n_s));
        for (int si = 0; si < n_s; ++si) {
            // polar angle from the apex direction; the last row meets the base
            const double u = static_cast<double>(si + 1) / n_s;
            for (int pi = 0; pi < n_phi; ++pi) {
                const double phi = 2.0 * M_PI * pi / n_phi;
                // direction sweeping apex (-z) toward the base ring
                const double pol = u * 0.98 * M_PI * 0.55;  // < ~99 deg, stays below base
                Vec3 dir(std::sin(pol) * std::cos(phi), std::sin(pol) * std::sin(phi),
                         -std::cos(pol));
                double t_lv = 0, t_rv = 0, t = 0;
                const bool h_lv = ray_ellipsoid_exit(anchor, dir, Vec3(0, 0, 0), lv_ax, t_lv);
                const bool h_rv = ray_ellipsoid_exit(anchor, dir, rv_c, rv_ax, t_rv);
                if (!h_lv && !h_rv) throw std::runtime_error("coarse mesh: ray missed the hull");
                t = std::max(h_lv ? t_lv : 0.0, h_rv ? t_rv : 0.0);
                Vec3 p = anchor + t * dir;
                if (si == n_s - 1) {  // clamp the last ring onto the base plane
                    const double zb = base_z(p.x());
                    if (p.z() < zb) {
                        // push the ring up along the hull: re-aim toward base height
                        p.z() = zb;
                        // project radially back onto the hull at this height
                        Vec3 radial(p.x(), p.y(), 0);
                        if (radial.norm() > 1e-9) {
                            radial.normalize();
                            double tr_lv = 0, tr_rv = 0;
                            const Vec3 a2(0, 0, p.z());
                            const bool g_lv = ray_ellipsoid_exit(a2, radial, Vec3(0, 0, 0), lv_ax, tr_lv);
                            const bool g_rv = ray_ellipsoid_exit(a2, radial, rv_c, rv_ax, tr_rv);
                            const double rr = std::max(g_lv ? tr_lv : 0.0, g_rv ? tr_rv : 0.0);
                            p = a2 + rr * radial;
                        }
                    } else {
                        p.z() = std::min(p.z(), zb);
                    }
                }
                ring[static_cast<size_t>(si)].push_back(pb.add_vertex(p));
            }
        }
        const int apex_id = pb.add_vertex(apex);
        for (int pi = 0; pi < n_phi; ++pi)
            pb.add_tri(apex_id, ring[0][static_cast<size_t>(pi)],
                       ring[0][static_cast<size_t>((pi + 1) % n_phi)], 1, -1);
        for (int si = 0; si + 1 < n_s; ++si) {
            for (int pi = 0; pi < n_phi; ++pi) {
                const int a = ring[static_cast<size_t>(si)][static_cast<size_t>(pi)];
                const int b = ring[static_cast<size_t>(si)][static_cast<size_t>((pi + 1) % n_phi)];
                const int c = ring[static_cast<size_t>(si + 1)][static_cast<size_t>(pi)];
                const int d = ring[static_cast<size_t>(si + 1)][static_cast<size_t>((pi + 1) % n_phi)];
                pb.add_tri(a, b, d, 1, -1);
                pb.add_tri(a, d, c, 1, -1);
            }
        }
    }

    // --- LV endo: truncated ellipsoid grid with an apex fan.
    {
        const int n_phi = std::max(6, static_cast<int>(std::lround(9 * scale)));
        const int n_s = std::max(3, static_cast<int>(std::lround(5 * scale)));
        const Vec3 ax(geo.lv_ra, geo.lv_rb, geo.lv_len);
        std::vector<std::vector<int>> ring(static_cast<size_t>(n_s));
        for (int si = 0; si < n_s; ++si) {
            const double u = static_cast<double>(si + 1) / n_s;
            for (int pi = 0; pi < n_phi; ++pi) {
                const double phi = 2.0 * M_PI * pi / n_phi;
                const double pol = u * M_PI * 0.52;
                Vec3 p(ax.x() * std::sin(pol) * std::cos(phi), ax.y() * std::sin(pol) * std::sin(phi),
                       -ax.z() * std::cos(pol));
                if (si == n_s - 1) p.z() = std::min(p.z(), base_z(p.x()));
                ring[static_cast<size_t>(si)].push_back(pb.add_vertex(p));
            }
        }
        const int apex_id = pb.add_vertex(Vec3(0, 0, -ax.z()));
        for (int pi = 0; pi < n_phi; ++pi)
            pb.add_tri(apex_id, ring[0][static_cast<size_t>((pi + 1) % n_phi)],
                       ring[0][static_cast<size_t>(pi)], 0, 0);
        for (int si = 0; si + 1 < n_s; ++si) {
            for (int pi = 0; pi < n_phi; ++pi) {
                const int a = ring[static_cast<size_t>(si)][static_cast<size_t>(pi)];
                const int b = ring[static_cast<size_t>(si)][static_cast<size_t>((pi + 1) % n_phi)];
                const int c = ring[static_cast<size_t>(si + 1)][static_cast<size_t>(pi)];
                const int d = ring[static_cast<size_t>(si + 1)][static_cast<size_t>(pi + 1 == n_phi ? 0 : pi + 1)];
                pb.add_tri(a, d, b, 0, 0);
                pb.add_tri(a, c, d, 0, 0);
            }
        }
    }

    // --- RV endo: free-wall sector of the RV endo ellipsoid (the part at or
    // outside the LV epi), as a clipped grid.
    {
        const int n_phi = std::max(6, static_cast<int>(std::lround(10 * scale)));
        const int n_s = std::max(3, static_cast<int>(std::lround(5 * scale)));
        const Vec3 rv_c(geo.rv_dx, 0, geo.rv_dz);
        const Vec3 lv_epi_ax(geo.lv_ra + geo.wall_lat, geo.lv_rb + geo.wall_lat,
                             geo.lv_len + geo.wall_apex);
        const Vec3 epi_ax = geo.rv_scale *
                            Vec3(1.04 * lv_epi_ax.x(), geo.rv_wrap * lv_epi_ax.y(), 0.88 * lv_epi_ax.z());
        const Vec3 ax = epi_ax - Vec3(geo.rv_wall, geo.rv_wall, geo.rv_wall);
        auto q_lv_epi = [&](const Vec3& p) {
            return (p.x() / lv_epi_ax.x()) * (p.x() / lv_epi_ax.x()) +
                   (p.y() / lv_epi_ax.y()) * (p.y() / lv_epi_ax.y()) +
                   (p.z() / lv_epi_ax.z()) * (p.z() / lv_epi_ax.z());
        };
        // grid over (polar from the RV apex, azimuth), vertices kept only in
        // the free-wall sector
        std::vector<std::vector<int>> grid(static_cast<size_t>(n_s + 1),
                                           std::vector<int>(static_cast<size_t>(n_phi + 1), -1));
        for (int si = 0; si <= n_s; ++si) {
            const double u = static_cast<double>(si) / n_s;
            for (int pi = 0; pi <= n_phi; ++pi) {
                const double phi = -0.75 * M_PI + 1.5 * M_PI * pi / n_phi;  // sector facing +x
                const double pol = (0.12 + 0.86 * u) * M_PI * 0.55;
                Vec3 p = rv_c + Vec3(ax.x() * std::sin(pol) * std::cos(phi),
                                     ax.y() * std::sin(pol) * std::sin(phi),
                                     -ax.z() * std::cos(pol));
                if (q_lv_epi(p) < 0.92) continue;              // inside the LV wall
                if (p.z() > base_z(p.x())) continue;           // above the base
                grid[static_cast<size_t>(si)][static_cast<size_t>(pi)] = pb.add_vertex(p);
            }
        }
        for (int si = 0; si < n_s; ++si) {
            for (int pi = 0; pi < n_phi; ++pi) {
                const int a = grid[static_cast<size_t>(si)][static_cast<size_t>(pi)];
                const int b = grid[static_cast<size_t>(si)][static_cast<size_t>(pi + 1)];
                const int c = grid[static_cast<size_t>(si + 1)][static_cast<size_t>(pi)];
                const int d = grid[static_cast<size_t>(si + 1)][static_cast<size_t>(pi + 1)];
                if (a >= 0 && b >= 0 && d >= 0) pb.add_tri(a, d, b, 0, 1);
                if (a >= 0 && d >= 0 && c >= 0) pb.add_tri(a, c, d, 0, 1);
                else if (a < 0 && b >= 0 && c >= 0 && d >= 0) pb.add_tri(b, c, d, 0, 1);
            }
        }
    }

    cm.surf.mesh.update_areas();
    cm.surf.mesh.validate();
    const size_t nv = cm.surf.mesh.vertices.size();
    cm.surf.a.resize(nv);
    cm.surf.rsin.resize(nv);
    cm.surf.rcos.resize(nv);
    for (size_t i = 0; i < nv; ++i) {
        const Vec3& p = cm.surf.mesh.vertices[i];
        cm.surf.a[i] = shape.apicobasal(p);
        const double r = shape.rotational(p);
        cm.surf.rsin[i] = std::sin(2.0 * M_PI * r);
        cm.surf.rcos[i] = std::cos(2.0 * M_PI * r);
    }
    cm.mean_edge = cm.surf.mesh.mean_edge_length();
    cm.surf.mean_edge = cm.mean_edge;
    return cm;
}

}  // namespace

CoarseMesh build_coarse_mesh(const ShapeParams& params, double rv_wall_mm, int target_triangles) {
    if (target_triangles < 40) throw std::runtime_error("coarse mesh: target too small");
    const ShapeGeometry geo = ShapeGeometry::from_params(params, rv_wall_mm);
    const BiventricularShape shape(geo);
    double scale = std::sqrt(target_triangles / 540.0) * 1.45;
    CoarseMesh cm;
    for (int it = 0; it < 8; ++it) {
        cm = build_with_budget(shape, geo, scale);
        const double ratio = static_cast<double>(cm.n_triangles()) / target_triangles;
        if (ratio > 0.75 && ratio < 1.25) return cm;
        scale *= std::sqrt(1.0 / ratio);
    }
    throw std::runtime_error("coarse mesh: triangle count did not converge to target");
}

void save_coarse_mesh(const CoarseMesh& cm, const std::string& basename) {
    save_trimesh(cm.surf.mesh, basename + "_mesh");
    json manifest;
    manifest["format_version"] = 1;
    manifest["kind"] = "coarse_mesh";
    manifest["n_classes"] = cm.n_classes();
    manifest["n_triangles"] = cm.n_triangles();
    manifest["mean_edge"] = cm.mean_edge;
    write_text_file(basename + ".json", manifest.dump(2));

    std::ofstream bin(basename + "_fields.bin", std::ios::binary);
    if (!bin) throw std::runtime_error("coarse mesh: cannot write fields");
    auto put = [&bin](const std::vector<double>& v) {
        std::vector<float> f(v.begin(), v.end());
        write_array(bin, f);
    };
    put(cm.surf.a);
    put(cm.surf.rsin);
    put(cm.surf.rcos);
    write_array(bin, cm.surf.tri_v);
    write_array(bin, cm.surf.tri_m);
}

CoarseMesh load_coarse_mesh(const std::string& basename) {
    const json manifest = json::parse(read_text_file(basename + ".json"));
    if (manifest.at("kind") != "coarse_mesh") throw std::runtime_error("not a coarse mesh file");
    CoarseMesh cm;
    cm.surf.mesh = load_trimesh(basename + "_mesh");
    cm.mean_edge = manifest.at("mean_edge");
    cm.surf.mean_edge = cm.mean_edge;
    const size_t nv = cm.surf.mesh.vertices.size();
    const size_t nt = cm.surf.mesh.tris.size();
    std::ifstream bin(basename + "_fields.bin", std::ios::binary);
    if (!bin) throw std::runtime_error("coarse mesh: cannot open fields");
    auto get = [&bin, nv]() {
        const auto f = read_array<float>(bin, nv);
        return std::vector<double>(f.begin(), f.end());
    };
    cm.surf.a = get();
    cm.surf.rsin = get();
    cm.surf.rcos = get();
    cm.surf.tri_v = read_array<uint8_t>(bin, nt);
    cm.surf.tri_m = read_array<uint8_t>(bin, nt);
    return cm;
}

}  // namespace vloc
