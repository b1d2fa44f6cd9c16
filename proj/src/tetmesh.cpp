#include "vloc/mesh/tetmesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace vloc {

namespace {

// The four faces of tet (a,b,c,d), each wound so the normal points away from
// the remaining vertex (outward for boundary faces).
constexpr int kFaceOrder[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};

struct FaceKey {
    std::array<int, 3> sorted;
    bool operator<(const FaceKey& o) const { return sorted < o.sorted; }
};

FaceKey face_key(int a, int b, int c) {
    std::array<int, 3> s = {a, b, c};
    std::sort(s.begin(), s.end());
    return {s};
}

}  // namespace

void TetMesh::orient_positive() {
    for (auto& t : tets) {
        if (tet_signed_volume(vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]]) < 0)
            std::swap(t[2], t[3]);
    }
}

void TetMesh::validate() const {
    const int nv = n_vertices();
    if (tets.empty()) throw std::runtime_error("tetmesh: empty");
    for (const auto& t : tets) {
        for (int k = 0; k < 4; ++k)
            if (t[k] < 0 || t[k] >= nv) throw std::runtime_error("tetmesh: index out of range");
        if (tet_signed_volume(vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]]) <= 0)
            throw std::runtime_error("tetmesh: non-positive tet volume");
    }
}

double TetMesh::total_volume() const {
    double v = 0.0;
    for (const auto& t : tets)
        v += tet_signed_volume(vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]]);
    return v;
}

Vec3 TetMesh::centroid_of_tet(int t) const {
    const auto& q = tets[static_cast<size_t>(t)];
    return 0.25 * (vertices[q[0]] + vertices[q[1]] + vertices[q[2]] + vertices[q[3]]);
}

void TetMesh::extract_boundary() {
    std::map<FaceKey, std::pair<std::array<int, 3>, int>> faces;  // key -> (wound face, count)
    for (const auto& t : tets) {
        for (const auto& fo : kFaceOrder) {
            std::array<int, 3> f = {t[fo[0]], t[fo[1]], t[fo[2]]};
            auto [it, inserted] = faces.emplace(face_key(f[0], f[1], f[2]), std::make_pair(f, 1));
            if (!inserted) ++it->second.second;
        }
    }
    boundary.clear();
    for (const auto& [k, v] : faces) {
        if (v.second == 1) boundary.push_back({v.first, WallClass::Epi});
    }
    vertex_wall.assign(vertices.size(), std::nullopt);
}

TriMesh TetMesh::surface(std::optional<WallClass> wall, std::vector<int>* vertex_map) const {
    TriMesh out;
    std::unordered_map<int, int> remap;
    if (vertex_map) vertex_map->clear();
    for (const auto& f : boundary) {
        if (wall && f.wall != *wall) continue;
        std::array<int, 3> tri;
        for (int k = 0; k < 3; ++k) {
            auto [it, inserted] = remap.emplace(f.verts[k], static_cast<int>(out.vertices.size()));
            if (inserted) {
                out.vertices.push_back(vertices[f.verts[k]]);
                if (vertex_map) vertex_map->push_back(f.verts[k]);
            }
            tri[k] = it->second;
        }
        out.tris.push_back(tri);
    }
    out.update_areas();
    return out;
}

void TetMesh::edge_graph(std::vector<std::array<int, 2>>& edges, std::vector<double>& lengths) const {
    std::map<std::pair<int, int>, bool> seen;
    edges.clear();
    lengths.clear();
    constexpr int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    for (const auto& t : tets) {
        for (const auto& p : pairs) {
            int a = t[p[0]], b = t[p[1]];
            if (a > b) std::swap(a, b);
            if (seen.emplace(std::make_pair(a, b), true).second) {
                edges.push_back({a, b});
                lengths.push_back((vertices[a] - vertices[b]).norm());
            }
        }
    }
}

void TetMesh::vertex_tet_adjacency(std::vector<int>& offsets, std::vector<int>& incident) const {
    offsets.assign(vertices.size() + 1, 0);
    for (const auto& t : tets)
        for (int k = 0; k < 4; ++k) ++offsets[static_cast<size_t>(t[k]) + 1];
    for (size_t i = 1; i < offsets.size(); ++i) offsets[i] += offsets[i - 1];
    incident.assign(static_cast<size_t>(offsets.back()), 0);
    std::vector<int> cursor(offsets.begin(), offsets.end() - 1);
    for (int ti = 0; ti < n_tets(); ++ti) {
        for (int k = 0; k < 4; ++k) {
            const int v = tets[static_cast<size_t>(ti)][k];
            incident[static_cast<size_t>(cursor[static_cast<size_t>(v)]++)] = ti;
        }
    }
}

int TetMesh::nearest_vertex(const Vec3& p) const {
    if (vertices.empty()) throw std::runtime_error("tetmesh: empty mesh");
    int best = 0;
    double best_d = (vertices[0] - p).squaredNorm();
    for (int i = 1; i < n_vertices(); ++i) {
        const double d = (vertices[static_cast<size_t>(i)] - p).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace vloc
