#include "vloc/mesh/geodesic.hpp"

#include <limits>
#include <queue>
#include <stdexcept>

namespace vloc {

GeodesicSolver::GeodesicSolver(const TetMesh& mesh) : mesh_(mesh) {
    if (mesh.vertices.empty()) throw std::runtime_error("geodesic: empty mesh");
    std::vector<std::array<int, 2>> edges;
    std::vector<double> lens;
    mesh.edge_graph(edges, lens);

    std::vector<int> counts(mesh.vertices.size(), 0);
    for (const auto& e : edges) {
        ++counts[static_cast<size_t>(e[0])];
        ++counts[static_cast<size_t>(e[1])];
    }
    offsets_.assign(mesh.vertices.size() + 1, 0);
    for (size_t i = 0; i < counts.size(); ++i) offsets_[i + 1] = offsets_[i] + counts[i];
    neighbors_.assign(static_cast<size_t>(offsets_.back()), 0);
    lengths_.assign(static_cast<size_t>(offsets_.back()), 0.0);
    std::vector<int> cursor(offsets_.begin(), offsets_.end() - 1);
    for (size_t k = 0; k < edges.size(); ++k) {
        const int a = edges[k][0], b = edges[k][1];
        neighbors_[static_cast<size_t>(cursor[static_cast<size_t>(a)])] = b;
        lengths_[static_cast<size_t>(cursor[static_cast<size_t>(a)]++)] = lens[k];
        neighbors_[static_cast<size_t>(cursor[static_cast<size_t>(b)])] = a;
        lengths_[static_cast<size_t>(cursor[static_cast<size_t>(b)]++)] = lens[k];
    }
}

std::vector<double> GeodesicSolver::distances_from(int source_vertex) const {
    const size_t n = mesh_.vertices.size();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    dist[static_cast<size_t>(source_vertex)] = 0.0;
    pq.emplace(0.0, source_vertex);
    while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[static_cast<size_t>(u)]) continue;
        for (int k = offsets_[static_cast<size_t>(u)]; k < offsets_[static_cast<size_t>(u) + 1]; ++k) {
            const int v = neighbors_[static_cast<size_t>(k)];
            const double nd = d + lengths_[static_cast<size_t>(k)];
            if (nd < dist[static_cast<size_t>(v)]) {
                dist[static_cast<size_t>(v)] = nd;
                pq.emplace(nd, v);
            }
        }
    }
    return dist;
}

double GeodesicSolver::distance(const Vec3& a, const Vec3& b) const {
    const int va = mesh_.nearest_vertex(a);
    const int vb = mesh_.nearest_vertex(b);
    if (va == vb) return 0.0;
    return distances_from(va)[static_cast<size_t>(vb)];
}

}  // namespace vloc
