#pragma once

#include <array>
#include <map>
#include <vector>

namespace vloc {

// Undirected graph with unit edge weights; the substrate for discrete
// Laplacian interpolation on meshes and on the electrode grid.
struct Graph {
    int n = 0;
    std::vector<std::array<int, 2>> edges;
};

// 8x28-style grid graph, 4-neighborhood. With periodic_horizontal the last
// column wraps around to the first (cylindrical torso topology).
Graph grid_graph(int rows, int cols, bool periodic_horizontal);

// Solves the discrete Laplace equation (graph Laplacian, unit weights) for
// the unknown vertices with the known values as Dirichlet data. Known values
// are reproduced exactly. Throws "isolated-unknowns" when an unknown
// component has no path to any known vertex.
std::vector<double> laplacian_interpolate(const Graph& g, const std::map<int, double>& known);

}  // namespace vloc
