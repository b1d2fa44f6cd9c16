#pragma once

#include <vector>

#include "vloc/heart/placement.hpp"
#include "vloc/heart/shape.hpp"

namespace vloc {

struct ModelSample {
    int heart_index = 0;
    int placement_index = 0;
    ShapeParams shape;
    FiberSpec fibers;
    PlacementParams placement;
};

// Samples the geometric variation plan: one shape + fiber draw per heart,
// one pose draw per (heart, placement). Each parameter group is driven by
// its own scrambled Halton stream, uniform over the stated ranges.
std::vector<ModelSample> sample_model_batch(int n_hearts, int placements_per_heart, uint64_t seed);

}  // namespace vloc
