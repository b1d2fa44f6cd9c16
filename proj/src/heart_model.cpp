#include "vloc/heart/heart_model.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "vloc/core/binio.hpp"
#include "vloc/heart/lattice.hpp"
#include "vloc/mesh/meshio.hpp"

namespace vloc {

using nlohmann::json;

void FiberSpec::validate() const {
    if (alpha_endo_deg < 40.0 || alpha_endo_deg > 80.0)
        throw std::runtime_error("fiber spec: alpha_endo outside [40,80] deg");
    if (alpha_epi_deg < -80.0 || alpha_epi_deg > -40.0)
        throw std::runtime_error("fiber spec: alpha_epi outside [-80,-40] deg");
}

Vec3 HeartModel::centroid() const {
    Vec3 c(0, 0, 0);
    for (const auto& v : tet.vertices) c += v;
    return c / static_cast<double>(tet.vertices.size());
}

void HeartModel::apply_rigid(const Mat3& R, const Vec3& t) {
    for (auto& v : tet.vertices) v = R * v + t;
    for (auto& f : fibers) f = R * f;
    for (auto& v : lv_blood.vertices) v = R * v + t;
    for (auto& v : rv_blood.vertices) v = R * v + t;
    for (auto& v : surf.mesh.vertices) v = R * v + t;
    lv_blood.update_areas();
    rv_blood.update_areas();
    surf.mesh.update_areas();
    frame_R = R * frame_R;
    frame_t = R * frame_t + t;
}

namespace {

WallClass classify_face(const BiventricularShape& shape, const TriMesh& probe_mesh, int tri,
                        double h) {
    const Vec3 c = probe_mesh.tri_centroid(tri);
    const Vec3 n = probe_mesh.tri_normal(tri);
    for (const double step : {0.35, 0.7, 1.1}) {
        switch (shape.region(c + step * h * n)) {
            case BiventricularShape::Region::LVCavity:
                return WallClass::LVEndo;
            case BiventricularShape::Region::RVCavity:
                return WallClass::RVEndo;
            case BiventricularShape::Region::Outside:
                if (std::abs(shape.base_plane_signed(c)) < 0.45 * h && n.z() > 0.5)
                    return WallClass::Base;
                return WallClass::Epi;
            case BiventricularShape::Region::Myocardium:
                break;  // sliver: probe landed back inside, try further out
        }
    }
    // Pinch-repair bumps can bury the probe; classify by the nearest surface.
    const double d_lv = std::abs(shape.lv_cavity(c));
    const double d_rv = std::abs(shape.rv_cavity(c));
    const double d_out = std::abs(shape.outer_signed(c));
    const double d_base = std::abs(shape.base_plane_signed(c));
    if (d_base <= std::min({d_lv, d_rv, d_out}) && n.z() > 0.5) return WallClass::Base;
    if (d_lv <= d_rv && d_lv <= d_out) return WallClass::LVEndo;
    if (d_rv <= d_lv && d_rv <= d_out) return WallClass::RVEndo;
    return WallClass::Epi;
}

TriMesh mesh_cavity(const BiventricularShape& shape, bool left, const HeartGenOptions& opt) {
    Vec3 lo, hi;
    shape.bounding_box(lo, hi, 2.0);
    LatticeOptions lopt;
    lopt.h = opt.cavity_resolution;
    lopt.min_kept_fraction = 0.9;
    auto f = [&](const Vec3& p) {
        return left ? shape.lv_cavity_eroded(p, opt.cavity_erosion)
                    : shape.rv_cavity_eroded(p, opt.cavity_erosion);
    };
    TetMesh cav = mesh_implicit(f, lo, hi, lopt);
    TriMesh surf = cav.surface(std::nullopt);
    if (!surf.is_watertight()) throw std::runtime_error("invalid-shape: cavity surface not closed");
    if (surf.enclosed_volume() < 1000.0) throw std::runtime_error("invalid-shape: cavity too small");
    return surf;
}

}  // namespace

void classify_heart_boundary(const BiventricularShape& shape, TetMesh& tet, double h) {
    TriMesh full = tet.surface(std::nullopt);
    size_t fi = 0;
    int n_lv = 0, n_rv = 0, n_epi = 0;
    for (auto& bf : tet.boundary) {
        bf.wall = classify_face(shape, full, static_cast<int>(fi++), h);
        n_lv += bf.wall == WallClass::LVEndo;
        n_rv += bf.wall == WallClass::RVEndo;
        n_epi += bf.wall == WallClass::Epi;
    }
    if (n_lv < 20 || n_rv < 20 || n_epi < 40)
        throw std::runtime_error("invalid-shape: wall classes missing");

    // Per-vertex wall labels: majority over incident boundary faces, endo
    // classes win ties so junction rings stay attached to the cavities.
    std::vector<std::array<int, 4>> votes(tet.vertices.size(), {0, 0, 0, 0});
    for (const auto& bf : tet.boundary)
        for (int m = 0; m < 3; ++m) ++votes[static_cast<size_t>(bf.verts[m])][static_cast<int>(bf.wall)];
    tet.vertex_wall.assign(tet.vertices.size(), std::nullopt);
    constexpr WallClass order[4] = {WallClass::LVEndo, WallClass::RVEndo, WallClass::Epi,
                                    WallClass::Base};
    for (size_t v = 0; v < tet.vertices.size(); ++v) {
        int best = -1, best_n = 0;
        for (const WallClass w : order) {
            const int n = votes[v][static_cast<int>(w)];
            if (n > best_n) {
                best_n = n;
                best = static_cast<int>(w);
            }
        }
        if (best >= 0) tet.vertex_wall[v] = static_cast<WallClass>(best);
    }
}

HeartModel generate_heart(const ShapeParams& params, const HeartGenOptions& opt) {
    if (opt.resolution <= 0) throw std::runtime_error("generate_heart: resolution must be > 0");
    const ShapeGeometry geo = ShapeGeometry::from_params(params, opt.rv_wall);
    const BiventricularShape shape(geo);

    Vec3 lo, hi;
    shape.bounding_box(lo, hi, 2.0);
    LatticeOptions lopt;
    lopt.h = opt.resolution;
    TetMesh tet = mesh_implicit([&](const Vec3& p) { return shape.myocardium(p); }, lo, hi, lopt);

    HeartModel heart;
    heart.geometry = geo;

    classify_heart_boundary(shape, tet, opt.resolution);
    heart.tet = std::move(tet);

    if (opt.want_fields) {
        const size_t nv = heart.tet.vertices.size();
        heart.coord_a.resize(nv);
        heart.coord_rsin.resize(nv);
        heart.coord_rcos.resize(nv);
        heart.coord_m.resize(nv);
        heart.coord_v.resize(nv);
        for (size_t v = 0; v < nv; ++v) {
            const Vec3& p = heart.tet.vertices[v];
            heart.coord_a[v] = shape.apicobasal(p);
            const double r = shape.rotational(p);
            heart.coord_rsin[v] = std::sin(6.283185307179586 * r);
            heart.coord_rcos[v] = std::cos(6.283185307179586 * r);
            heart.coord_m[v] = shape.transmural(p);
            heart.coord_v[v] = shape.rv_free_wall(p) ? 1 : 0;
        }

        heart.lv_blood = mesh_cavity(shape, true, opt);
        heart.rv_blood = mesh_cavity(shape, false, opt);

        // Merged epi+endo surface with labels (base excluded).
        heart.surf_vertex_map.clear();
        std::unordered_map<int, int> remap;
        for (const auto& bf : heart.tet.boundary) {
            if (bf.wall == WallClass::Base) continue;
            std::array<int, 3> tri;
            for (int m = 0; m < 3; ++m) {
                auto [it, ins] = remap.emplace(bf.verts[m],
                                               static_cast<int>(heart.surf.mesh.vertices.size()));
                if (ins) {
                    heart.surf.mesh.vertices.push_back(heart.tet.vertices[bf.verts[m]]);
                    heart.surf_vertex_map.push_back(bf.verts[m]);
                }
                tri[m] = it->second;
            }
            heart.surf.mesh.tris.push_back(tri);
            heart.surf_tri_wall.push_back(bf.wall);
            heart.surf.tri_m.push_back(bf.wall == WallClass::Epi ? 1 : 0);
            uint8_t v_label;
            if (bf.wall == WallClass::LVEndo) {
                v_label = 0;
            } else if (bf.wall == WallClass::RVEndo) {
                v_label = 1;
            } else {  // epi: majority of the vertex v-field
                int n_rv = 0;
                for (int m = 0; m < 3; ++m) n_rv += heart.coord_v[static_cast<size_t>(bf.verts[m])];
                v_label = n_rv >= 2 ? 1 : 0;
            }
            heart.surf.tri_v.push_back(v_label);
        }
        heart.surf.mesh.update_areas();
        heart.surf.mesh.validate();
        heart.surf.a.resize(heart.surf_vertex_map.size());
        heart.surf.rsin.resize(heart.surf_vertex_map.size());
        heart.surf.rcos.resize(heart.surf_vertex_map.size());
        for (size_t i = 0; i < heart.surf_vertex_map.size(); ++i) {
            const int tv = heart.surf_vertex_map[i];
            heart.surf.a[i] = heart.coord_a[static_cast<size_t>(tv)];
            heart.surf.rsin[i] = heart.coord_rsin[static_cast<size_t>(tv)];
            heart.surf.rcos[i] = heart.coord_rcos[static_cast<size_t>(tv)];
        }
        heart.surf.mean_edge = heart.surf.mesh.mean_edge_length();
    }

    return heart;
}

void assign_fibers(HeartModel& heart, const FiberSpec& spec) {
    spec.validate();
    if (heart.coord_m.empty())
        throw std::runtime_error("assign_fibers: coordinate fields missing");
    const BiventricularShape shape(heart.geometry);
    // Fibers are constructed in the heart's local frame, then mapped through
    // any placement already applied.
    const Mat3 Rinv = heart.frame_R.transpose();
    heart.fibers.resize(heart.tet.tets.size());
    for (int t = 0; t < heart.tet.n_tets(); ++t) {
        const Vec3 c_world = heart.tet.centroid_of_tet(t);
        const Vec3 c = Rinv * (c_world - heart.frame_t);
        const double m = shape.construction_transmural(c);
        const double alpha =
            deg2rad(spec.alpha_endo_deg + m * (spec.alpha_epi_deg - spec.alpha_endo_deg));
        const Vec3 n = shape.transmural_dir(c);
        const Vec3 circ = shape.circumferential_dir(c);
        const Vec3 up = n.cross(circ);
        Vec3 f = std::cos(alpha) * circ + std::sin(alpha) * up;
        f.normalize();
        heart.fibers[static_cast<size_t>(t)] = heart.frame_R * f;
    }
}

void save_heart(const HeartModel& h, const std::string& basename) {
    save_tetmesh(h.tet, basename + "_tet");
    save_trimesh(h.lv_blood, basename + "_lvblood");
    save_trimesh(h.rv_blood, basename + "_rvblood");

    json manifest;
    manifest["format_version"] = 1;
    manifest["kind"] = "heart";
    manifest["geometry"] = {h.geometry.lv_ra,   h.geometry.lv_rb,   h.geometry.lv_len,
                            h.geometry.wall_lat, h.geometry.wall_apex, h.geometry.base_frac,
                            h.geometry.tilt_deg, h.geometry.rv_scale, h.geometry.rv_dx,
                            h.geometry.rv_dz,   h.geometry.rv_wrap,  h.geometry.rv_wall};
    std::vector<double> R(9), t(3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) R[static_cast<size_t>(3 * i + j)] = h.frame_R(i, j);
    for (int i = 0; i < 3; ++i) t[static_cast<size_t>(i)] = h.frame_t[i];
    manifest["frame_R"] = R;
    manifest["frame_t"] = t;

    std::ofstream bin(basename + "_fields.bin", std::ios::binary);
    if (!bin) throw std::runtime_error("save_heart: cannot write fields");
    auto put = [&bin](const std::vector<double>& v) {
        std::vector<float> f(v.begin(), v.end());
        write_array(bin, f);
    };
    put(h.coord_a);
    put(h.coord_rsin);
    put(h.coord_rcos);
    put(h.coord_m);
    write_array(bin, h.coord_v);
    {
        std::vector<float> f;
        f.reserve(h.fibers.size() * 3);
        for (const auto& d : h.fibers) {
            f.push_back(static_cast<float>(d.x()));
            f.push_back(static_cast<float>(d.y()));
            f.push_back(static_cast<float>(d.z()));
        }
        write_array(bin, f);
    }
    manifest["n_vertices"] = h.tet.vertices.size();
    manifest["n_fibers"] = h.fibers.size();
    write_text_file(basename + ".json", manifest.dump(2));
}

HeartModel load_heart(const std::string& basename) {
    HeartModel h;
    h.tet = load_tetmesh(basename + "_tet");
    h.lv_blood = load_trimesh(basename + "_lvblood");
    h.rv_blood = load_trimesh(basename + "_rvblood");

    const json manifest = json::parse(read_text_file(basename + ".json"));
    const auto g = manifest.at("geometry");
    h.geometry = {g[0], g[1], g[2], g[3], g[4], g[5], g[6], g[7], g[8], g[9], g[10], g[11]};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) h.frame_R(i, j) = manifest.at("frame_R")[static_cast<size_t>(3 * i + j)];
    for (int i = 0; i < 3; ++i) h.frame_t[i] = manifest.at("frame_t")[static_cast<size_t>(i)];

    const size_t nv = manifest.at("n_vertices").get<size_t>();
    const size_t nf = manifest.at("n_fibers").get<size_t>();
    std::ifstream bin(basename + "_fields.bin", std::ios::binary);
    if (!bin) throw std::runtime_error("load_heart: cannot open fields");
    auto get = [&bin, nv]() {
        const auto f = read_array<float>(bin, nv);
        return std::vector<double>(f.begin(), f.end());
    };
    h.coord_a = get();
    h.coord_rsin = get();
    h.coord_rcos = get();
    h.coord_m = get();
    h.coord_v = read_array<uint8_t>(bin, nv);
    {
        const auto f = read_array<float>(bin, nf * 3);
        h.fibers.resize(nf);
        for (size_t i = 0; i < nf; ++i) h.fibers[i] = Vec3(f[3 * i], f[3 * i + 1], f[3 * i + 2]);
    }

    // Rebuild the labeled surface view from the stored boundary classes.
    HeartModel tmp;
    std::unordered_map<int, int> remap;
    for (const auto& bf : h.tet.boundary) {
        if (bf.wall == WallClass::Base) continue;
        std::array<int, 3> tri;
        for (int m = 0; m < 3; ++m) {
            auto [it, ins] = remap.emplace(bf.verts[m], static_cast<int>(h.surf.mesh.vertices.size()));
            if (ins) {
                h.surf.mesh.vertices.push_back(h.tet.vertices[bf.verts[m]]);
                h.surf_vertex_map.push_back(bf.verts[m]);
            }
            tri[m] = it->second;
        }
        h.surf.mesh.tris.push_back(tri);
        h.surf_tri_wall.push_back(bf.wall);
        h.surf.tri_m.push_back(bf.wall == WallClass::Epi ? 1 : 0);
        if (bf.wall == WallClass::LVEndo) {
            h.surf.tri_v.push_back(0);
        } else if (bf.wall == WallClass::RVEndo) {
            h.surf.tri_v.push_back(1);
        } else {
            // epi: majority of the vertex v-field
            int n_rv = 0;
            for (int m = 0; m < 3; ++m) n_rv += h.coord_v[static_cast<size_t>(bf.verts[m])];
            h.surf.tri_v.push_back(n_rv >= 2 ? 1 : 0);
        }
    }
    h.surf.mesh.update_areas();
    h.surf.a.resize(h.surf_vertex_map.size());
    h.surf.rsin.resize(h.surf_vertex_map.size());
    h.surf.rcos.resize(h.surf_vertex_map.size());
    for (size_t i = 0; i < h.surf_vertex_map.size(); ++i) {
        const int tv = h.surf_vertex_map[i];
        h.surf.a[i] = h.coord_a[static_cast<size_t>(tv)];
        h.surf.rsin[i] = h.coord_rsin[static_cast<size_t>(tv)];
        h.surf.rcos[i] = h.coord_rcos[static_cast<size_t>(tv)];
    }
    h.surf.mean_edge = h.surf.mesh.mean_edge_length();
    return h;
}

}  // namespace vloc
