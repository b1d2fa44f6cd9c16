#include "vloc/heart/param_sampler.hpp"

#include <stdexcept>

#include "vloc/heart/halton.hpp"

namespace vloc {

std::vector<ModelSample> sample_model_batch(int n_hearts, int placements_per_heart, uint64_t seed) {
    if (n_hearts < 1 || placements_per_heart < 1)
        throw std::runtime_error("sample_model_batch: counts must be >= 1");

    HaltonSampler shape_stream(ShapeParams::kNumShapeWeights, seed ^ 0x51a9e);
    HaltonSampler fiber_stream(2, seed ^ 0xf1be5);
    HaltonSampler place_stream(6, seed ^ 0x9a5ed);

    std::vector<ModelSample> out;
    out.reserve(static_cast<size_t>(n_hearts) * placements_per_heart);
    for (int h = 0; h < n_hearts; ++h) {
        const auto su = shape_stream.next();
        ShapeParams shape;
        shape.weights.resize(su.size());
        for (size_t i = 0; i < su.size(); ++i) shape.weights[i] = -3.0 + 6.0 * su[i];

        const auto fu = fiber_stream.next();
        FiberSpec fibers;
        fibers.alpha_endo_deg = 40.0 + 40.0 * fu[0];
        fibers.alpha_epi_deg = -80.0 + 40.0 * fu[1];

        for (int p = 0; p < placements_per_heart; ++p) {
            const auto pu = place_stream.next();
            PlacementParams place;
            place.roll_deg = -20.0 + 40.0 * pu[0];
            place.yaw_deg = -20.0 + 40.0 * pu[1];
            place.pitch_deg = -20.0 + 40.0 * pu[2];
            place.dx = -20.0 + 40.0 * pu[3];
            place.dz = -20.0 + 40.0 * pu[4];
            place.chest_distance = 12.0 + 40.0 * pu[5];

            ModelSample s;
            s.heart_index = h;
            s.placement_index = p;
            s.shape = shape;
            s.fibers = fibers;
            s.placement = place;
            out.push_back(std::move(s));
        }
    }
    return out;
}

}  // namespace vloc
