#pragma once

#include <vector>

#include "vloc/mesh/tetmesh.hpp"

namespace vloc {

// Shortest paths along the tet-mesh edge graph (Dijkstra). Reused across
// queries against the same source vertex, which is how evaluation amortizes
// one solve over the top-k candidates of a sample.
class GeodesicSolver {
  public:
    explicit GeodesicSolver(const TetMesh& mesh);

    // Distances from a source vertex to all vertices, in mm.
    std::vector<double> distances_from(int source_vertex) const;

    // Shortest-path distance between two points snapped to their nearest
    // mesh vertices. Symmetric, >= Euclidean distance between the snapped
    // vertices.
    double distance(const Vec3& a, const Vec3& b) const;

    const TetMesh& mesh() const { return mesh_; }

  private:
    const TetMesh& mesh_;
    std::vector<int> offsets_;       // CSR adjacency
    std::vector<int> neighbors_;
    std::vector<double> lengths_;
};

}  // namespace vloc
