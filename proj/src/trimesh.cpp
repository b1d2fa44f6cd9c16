#include "vloc/mesh/trimesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace vloc {

void TriMesh::update_areas() {
    areas.resize(tris.size());
    for (size_t t = 0; t < tris.size(); ++t) {
        const auto& tr = tris[t];
        areas[t] = triangle_area(vertices[tr[0]], vertices[tr[1]], vertices[tr[2]]);
    }
}

double TriMesh::total_area() const {
    double s = 0.0;
    for (double a : areas) s += a;
    return s;
}

void TriMesh::validate() const {
    const int nv = n_vertices();
    for (const auto& v : vertices) {
        if (!v.allFinite()) throw std::runtime_error("trimesh: non-finite vertex");
    }
    if (areas.size() != tris.size()) throw std::runtime_error("trimesh: stale area cache");
    for (size_t t = 0; t < tris.size(); ++t) {
        for (int k = 0; k < 3; ++k) {
            if (tris[t][k] < 0 || tris[t][k] >= nv)
                throw std::runtime_error("trimesh: vertex index out of range");
        }
        if (areas[t] <= 1e-9) throw std::runtime_error("degenerate-triangle");
    }
}

double TriMesh::mean_edge_length() const {
    double s = 0.0;
    size_t n = 0;
    for (const auto& e : edges()) {
        s += (vertices[e[0]] - vertices[e[1]]).norm();
        ++n;
    }
    return n > 0 ? s / static_cast<double>(n) : 0.0;
}

std::vector<std::array<int, 2>> TriMesh::edges() const {
    std::vector<std::array<int, 2>> out;
    out.reserve(tris.size() * 3 / 2);
    std::map<std::pair<int, int>, bool> seen;
    for (const auto& tr : tris) {
        for (int k = 0; k < 3; ++k) {
            int a = tr[k], b = tr[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            if (seen.emplace(std::make_pair(a, b), true).second) out.push_back({a, b});
        }
    }
    return out;
}

bool TriMesh::is_closed_manifold() const {
    // Count directed edges: closed + consistent winding means every directed
    // edge appears exactly once and its reverse exactly once.
    std::map<std::pair<int, int>, int> directed;
    for (const auto& tr : tris) {
        for (int k = 0; k < 3; ++k) {
            const int a = tr[k], b = tr[(k + 1) % 3];
            if (++directed[{a, b}] > 1) return false;
        }
    }
    for (const auto& [e, n] : directed) {
        auto rev = directed.find({e.second, e.first});
        if (rev == directed.end() || rev->second != 1) return false;
    }
    return true;
}

bool TriMesh::is_watertight() const {
    if (tris.empty()) return false;
    std::map<std::pair<int, int>, int> directed;
    for (const auto& tr : tris) {
        for (int k = 0; k < 3; ++k) {
            ++directed[{tr[k], tr[(k + 1) % 3]}];
        }
    }
    for (const auto& [e, n] : directed) {
        auto rev = directed.find({e.second, e.first});
        if (rev == directed.end() || rev->second != n) return false;
    }
    return true;
}

int TriMesh::euler_characteristic() const {
    return n_vertices() - static_cast<int>(edges().size()) + n_tris();
}

Vec3 TriMesh::centroid() const {
    Vec3 c(0, 0, 0);
    for (const auto& v : vertices) c += v;
    return vertices.empty() ? c : Vec3(c / static_cast<double>(vertices.size()));
}

double TriMesh::enclosed_volume() const {
    double v = 0.0;
    for (const auto& tr : tris) {
        const Vec3 &a = vertices[tr[0]], &b = vertices[tr[1]], &c = vertices[tr[2]];
        v += a.dot(b.cross(c)) / 6.0;
    }
    return v;
}

TriMesh read_ply_ascii(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line.substr(0, 3) != "ply")
        throw std::runtime_error("ply: missing magic");
    int n_verts = -1, n_faces = -1;
    bool in_header = true;
    int vertex_props = 0;
    bool counting_vertex_props = false;
    while (in_header && std::getline(is, line)) {
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt != "ascii") throw std::runtime_error("ply: only ascii supported");
        } else if (tok == "element") {
            std::string what;
            int count;
            ls >> what >> count;
            counting_vertex_props = (what == "vertex");
            if (what == "vertex") n_verts = count;
            if (what == "face") n_faces = count;
        } else if (tok == "property") {
            if (counting_vertex_props) ++vertex_props;
        } else if (tok == "end_header") {
            in_header = false;
        }
    }
    if (n_verts < 0 || n_faces < 0) throw std::runtime_error("ply: incomplete header");
    if (vertex_props < 3) throw std::runtime_error("ply: vertices need x y z");
    TriMesh m;
    m.vertices.reserve(static_cast<size_t>(n_verts));
    for (int i = 0; i < n_verts; ++i) {
        double x, y, z;
        if (!(is >> x >> y >> z)) throw std::runtime_error("ply: truncated vertices");
        for (int k = 3; k < vertex_props; ++k) {
            double skip;
            is >> skip;
        }
        m.vertices.emplace_back(x, y, z);
    }
    for (int i = 0; i < n_faces; ++i) {
        int n;
        if (!(is >> n)) throw std::runtime_error("ply: truncated faces");
        std::vector<int> idx(static_cast<size_t>(n));
        for (int k = 0; k < n; ++k) is >> idx[static_cast<size_t>(k)];
        // fan-triangulate polygons
        for (int k = 1; k + 1 < n; ++k)
            m.tris.push_back({idx[0], idx[static_cast<size_t>(k)], idx[static_cast<size_t>(k + 1)]});
    }
    m.update_areas();
    return m;
}

TriMesh make_icosphere(const Vec3& c, double radius, int subdivisions) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                           {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                           {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
    std::vector<std::array<int, 3>> f = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
        {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    for (auto& p : v) p.normalize();
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            Vec3 m = (v[a] + v[b]).normalized();
            v.push_back(m);
            const int idx = static_cast<int>(v.size()) - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> nf;
        nf.reserve(f.size() * 4);
        for (const auto& t : f) {
            const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
            nf.push_back({t[0], ab, ca});
            nf.push_back({t[1], bc, ab});
            nf.push_back({t[2], ca, bc});
            nf.push_back({ab, bc, ca});
        }
        f = std::move(nf);
    }
    TriMesh m;
    m.vertices.reserve(v.size());
    for (const auto& p : v) m.vertices.push_back(c + radius * p);
    m.tris = std::move(f);
    m.update_areas();
    return m;
}

}  // namespace vloc
