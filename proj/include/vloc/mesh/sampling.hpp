#pragma once

#include <cstdint>
#include <vector>

#include "vloc/mesh/barycentric.hpp"

namespace vloc {

// n points sampled area-proportionally over triangles, uniform within each
// triangle (square-root warp). Deterministic for a given seed.
std::vector<BaryPoint> sample_surface_uniform(const TriMesh& surf, int n, uint64_t seed);

}  // namespace vloc
