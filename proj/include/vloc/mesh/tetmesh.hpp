#pragma once

#include <array>
#include <optional>
#include <vector>

#include "vloc/mesh/trimesh.hpp"

namespace vloc {

// Wall classes of the biventricular boundary. Base covers the flat truncation
// plane; it is excluded from origin sampling and from the coarse class mesh.
enum class WallClass : uint8_t { LVEndo = 0, RVEndo = 1, Epi = 2, Base = 3 };

struct BoundaryFace {
    std::array<int, 3> verts;  // outward wound (normal points out of the solid)
    WallClass wall;
};

// Tetrahedral volume mesh with classified boundary. Tets are stored with
// positive signed volume.
struct TetMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 4>> tets;
    std::vector<BoundaryFace> boundary;                  // filled by extract_boundary()
    std::vector<std::optional<WallClass>> vertex_wall;   // per-vertex label, boundary only

    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_tets() const { return static_cast<int>(tets.size()); }

    void orient_positive();   // swaps two vertices of negatively oriented tets
    void validate() const;    // index range + positive volumes

    double total_volume() const;
    Vec3 centroid_of_tet(int t) const;

    // Boundary faces = faces referenced by exactly one tet; wound outward.
    // Does not classify; classification is domain logic (see heartgen).
    void extract_boundary();

    // Surface of one wall class (or all classes when wall == nullopt),
    // vertices reindexed. vertex_map[i] = index in the volume mesh.
    TriMesh surface(std::optional<WallClass> wall, std::vector<int>* vertex_map = nullptr) const;

    // Undirected edge list of the tet graph with Euclidean lengths.
    void edge_graph(std::vector<std::array<int, 2>>& edges, std::vector<double>& lengths) const;

    // CSR-style vertex -> incident tets adjacency.
    void vertex_tet_adjacency(std::vector<int>& offsets, std::vector<int>& incident) const;

    int nearest_vertex(const Vec3& p) const;  // lowest index wins on ties
};

}  // namespace vloc
