#include "vloc/labels/fuzzy_codec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vloc {

ClassWeights encode_fuzzy(const Vec3& origin, const CoarseMesh& coarse) {
    const BaryPoint bp = nearest_surface_point(coarse.surf.mesh, origin);
    ClassWeights w = ClassWeights::Zero(coarse.n_classes());
    const auto& tri = coarse.surf.mesh.tris[static_cast<size_t>(bp.tri)];
    for (int k = 0; k < 3; ++k) w[tri[k]] += static_cast<float>(bp.w[static_cast<size_t>(k)]);
    return w;
}

ClassWeights encode_fuzzy_coords(const VentCoord& c, const CoarseMesh& coarse) {
    const SurfacePoint sp = coords_to_point(c, coarse.surf);
    ClassWeights w = ClassWeights::Zero(coarse.n_classes());
    const auto& tri = coarse.surf.mesh.tris[static_cast<size_t>(sp.bary.tri)];
    for (int k = 0; k < 3; ++k) w[tri[k]] += static_cast<float>(sp.bary.w[static_cast<size_t>(k)]);
    return w;
}

std::vector<RankedSolution> decode_fuzzy(const ClassWeights& weights, const CoarseMesh& coarse,
                                         int k) {
    if (k < 1) throw std::runtime_error("decode_fuzzy: k must be >= 1");
    if (weights.size() != coarse.n_classes())
        throw std::runtime_error("decode_fuzzy: class-count mismatch");
    if (weights.cwiseAbs().maxCoeff() <= 0.0f) throw std::runtime_error("degenerate-prediction");

    const int nt = coarse.n_triangles();
    std::vector<double> score(static_cast<size_t>(nt), 0.0);
    for (int t = 0; t < nt; ++t) {
        const auto& tri = coarse.surf.mesh.tris[static_cast<size_t>(t)];
        score[static_cast<size_t>(t)] = static_cast<double>(weights[tri[0]]) + weights[tri[1]] + weights[tri[2]];
    }
    const auto neighbors = coarse.vertex_sharing_neighbors();

    std::vector<char> excluded(static_cast<size_t>(nt), 0);
    std::vector<RankedSolution> out;
    for (int pick = 0; pick < k; ++pick) {
        int best = -1;
        double best_score = -1e300;
        for (int t = 0; t < nt; ++t) {
            if (excluded[static_cast<size_t>(t)]) continue;
            if (score[static_cast<size_t>(t)] > best_score) {  // ties: lowest index wins
                best_score = score[static_cast<size_t>(t)];
                best = t;
            }
        }
        if (best < 0) break;  // exhausted

        RankedSolution sol;
        sol.tri = best;
        sol.score = best_score;
        const auto& tri = coarse.surf.mesh.tris[static_cast<size_t>(best)];
        double w[3] = {weights[tri[0]], weights[tri[1]], weights[tri[2]]};
        const double sum = w[0] + w[1] + w[2];
        if (sum > 0) {
            for (double& x : w) x /= sum;
        } else {
            w[0] = w[1] = w[2] = 1.0 / 3.0;
        }
        BaryPoint bp;
        bp.tri = best;
        bp.w = {w[0], w[1], w[2]};
        sol.point = bp.point(coarse.surf.mesh);
        sol.coords = encode_origin_coords(coarse.surf, bp);
        out.push_back(sol);

        excluded[static_cast<size_t>(best)] = 1;
        for (int nb : neighbors[static_cast<size_t>(best)]) excluded[static_cast<size_t>(nb)] = 1;
    }
    if (out.empty()) throw std::runtime_error("degenerate-prediction");
    return out;
}

double topk_geodesic_error(const std::vector<RankedSolution>& solutions, const Vec3& truth,
                           const HeartModel& heart, const GeodesicSolver& geo, int k) {
    if (solutions.empty()) throw std::runtime_error("topk_geodesic_error: no solutions");
    const int tv = heart.tet.nearest_vertex(truth);
    const auto dist = geo.distances_from(tv);
    double best = std::numeric_limits<double>::infinity();
    const int n = std::min<int>(k, static_cast<int>(solutions.size()));
    for (int i = 0; i < n; ++i) {
        const SurfacePoint sp = coords_to_point(solutions[static_cast<size_t>(i)].coords, heart.surf);
        const int sv = heart.tet.nearest_vertex(sp.point);
        best = std::min(best, dist[static_cast<size_t>(sv)]);
    }
    return best;
}

}  // namespace vloc
