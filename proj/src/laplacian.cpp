#include "vloc/mesh/laplacian.hpp"

#include <Eigen/Sparse>
#include <queue>
#include <stdexcept>

namespace vloc {

Graph grid_graph(int rows, int cols, bool periodic_horizontal) {
    Graph g;
    g.n = rows * cols;
    auto id = [cols](int r, int c) { return r * cols + c; };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (r + 1 < rows) g.edges.push_back({id(r, c), id(r + 1, c)});
            if (c + 1 < cols)
                g.edges.push_back({id(r, c), id(r, c + 1)});
            else if (periodic_horizontal && cols > 2)
                g.edges.push_back({id(r, c), id(r, 0)});
        }
    }
    return g;
}

std::vector<double> laplacian_interpolate(const Graph& g, const std::map<int, double>& known) {
    if (known.empty()) throw std::runtime_error("laplacian_interpolate: no known values");
    std::vector<char> is_known(static_cast<size_t>(g.n), 0);
    for (const auto& [i, v] : known) {
        if (i < 0 || i >= g.n) throw std::runtime_error("laplacian_interpolate: index out of range");
        is_known[static_cast<size_t>(i)] = 1;
    }

    // Unknown -> dense sub-index.
    std::vector<int> sub(static_cast<size_t>(g.n), -1);
    int n_unknown = 0;
    for (int i = 0; i < g.n; ++i)
        if (!is_known[static_cast<size_t>(i)]) sub[static_cast<size_t>(i)] = n_unknown++;

    std::vector<double> out(static_cast<size_t>(g.n), 0.0);
    for (const auto& [i, v] : known) out[static_cast<size_t>(i)] = v;
    if (n_unknown == 0) return out;

    // Reach check: every unknown must touch a known vertex through the graph.
    {
        std::vector<char> reached(static_cast<size_t>(g.n), 0);
        std::queue<int> q;
        for (const auto& [i, v] : known) {
            reached[static_cast<size_t>(i)] = 1;
            q.push(i);
        }
        std::vector<std::vector<int>> adj(static_cast<size_t>(g.n));
        for (const auto& e : g.edges) {
            adj[static_cast<size_t>(e[0])].push_back(e[1]);
            adj[static_cast<size_t>(e[1])].push_back(e[0]);
        }
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (int v : adj[static_cast<size_t>(u)]) {
                if (!reached[static_cast<size_t>(v)]) {
                    reached[static_cast<size_t>(v)] = 1;
                    q.push(v);
                }
            }
        }
        for (int i = 0; i < g.n; ++i)
            if (!reached[static_cast<size_t>(i)]) throw std::runtime_error("isolated-unknowns");
    }

    // L_uu x_u = -L_uk x_k with unit weights: degree on the diagonal,
    // -1 per edge.
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_unknown);
    std::vector<double> degree(static_cast<size_t>(g.n), 0.0);
    for (const auto& e : g.edges) {
        degree[static_cast<size_t>(e[0])] += 1.0;
        degree[static_cast<size_t>(e[1])] += 1.0;
        const int a = e[0], b = e[1];
        const bool ka = is_known[static_cast<size_t>(a)], kb = is_known[static_cast<size_t>(b)];
        if (!ka && !kb) {
            trips.emplace_back(sub[static_cast<size_t>(a)], sub[static_cast<size_t>(b)], -1.0);
            trips.emplace_back(sub[static_cast<size_t>(b)], sub[static_cast<size_t>(a)], -1.0);
        } else if (!ka && kb) {
            rhs[sub[static_cast<size_t>(a)]] += out[static_cast<size_t>(b)];
        } else if (ka && !kb) {
            rhs[sub[static_cast<size_t>(b)]] += out[static_cast<size_t>(a)];
        }
    }
    for (int i = 0; i < g.n; ++i)
        if (!is_known[static_cast<size_t>(i)])
            trips.emplace_back(sub[static_cast<size_t>(i)], sub[static_cast<size_t>(i)],
                               degree[static_cast<size_t>(i)]);

    Eigen::SparseMatrix<double> L(n_unknown, n_unknown);
    L.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(L);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("laplacian_interpolate: factorization failed");
    Eigen::VectorXd x = solver.solve(rhs);

    for (int i = 0; i < g.n; ++i)
        if (!is_known[static_cast<size_t>(i)]) out[static_cast<size_t>(i)] = x[sub[static_cast<size_t>(i)]];
    return out;
}

}  // namespace vloc
