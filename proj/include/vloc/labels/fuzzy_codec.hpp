#pragma once

#include <Eigen/Dense>

#include "vloc/labels/coarse_mesh.hpp"
#include "vloc/labels/vent_coords.hpp"
#include "vloc/mesh/geodesic.hpp"

namespace vloc {

// Dense class-weight vector over the coarse-mesh vertices. Labels have at
// most three nonzeros summing to one; predictions are softmax outputs.
using ClassWeights = Eigen::VectorXf;

struct RankedSolution {
    Vec3 point;        // on the coarse mesh
    int tri = -1;
    double score = 0;  // sum of the triangle's class weights
    VentCoord coords;  // interpolated at the decoded point
};

// Barycentric weights of a point (snapped to the coarse mesh) written into
// the enclosing triangle's vertex classes.
ClassWeights encode_fuzzy(const Vec3& origin, const CoarseMesh& coarse);

// Same, but the origin arrives as normalized coordinates and is transferred
// onto the coarse mesh first.
ClassWeights encode_fuzzy_coords(const VentCoord& c, const CoarseMesh& coarse);

// Greedy ranked decoding: per-triangle score = sum of its vertex weights;
// after each pick every triangle sharing a vertex with any selected one is
// excluded. Each entry's point uses the triangle's weights renormalized to
// barycentric coordinates. Throws "degenerate-prediction" for an all-zero
// weight vector.
std::vector<RankedSolution> decode_fuzzy(const ClassWeights& weights, const CoarseMesh& coarse,
                                         int k);

// Minimum geodesic error among the first k solutions, each transferred onto
// the evaluation heart through its normalized coordinates.
double topk_geodesic_error(const std::vector<RankedSolution>& solutions, const Vec3& truth,
                           const HeartModel& heart, const GeodesicSolver& geo, int k);

}  // namespace vloc
