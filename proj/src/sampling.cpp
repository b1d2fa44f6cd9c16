#include "vloc/mesh/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vloc/core/rng.hpp"

namespace vloc {

std::vector<BaryPoint> sample_surface_uniform(const TriMesh& surf, int n, uint64_t seed) {
    if (n < 1) throw std::runtime_error("sample_surface_uniform: n must be >= 1");
    if (surf.areas.size() != surf.tris.size())
        throw std::runtime_error("sample_surface_uniform: stale area cache");
    std::vector<double> cum(surf.tris.size());
    double acc = 0.0;
    for (size_t t = 0; t < surf.tris.size(); ++t) {
        acc += surf.areas[t];
        cum[t] = acc;
    }
    if (acc <= 0.0) throw std::runtime_error("sample_surface_uniform: zero-area mesh");

    Rng rng(seed, /*stream=*/0x5a7f);
    std::vector<BaryPoint> out;
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform() * acc;
        const auto it = std::lower_bound(cum.begin(), cum.end(), u);
        const int tri = static_cast<int>(std::min<size_t>(
            static_cast<size_t>(it - cum.begin()), surf.tris.size() - 1));
        const double su = std::sqrt(rng.uniform());
        const double v = rng.uniform();
        BaryPoint bp;
        bp.tri = tri;
        bp.w = {1.0 - su, su * (1.0 - v), su * v};
        out.push_back(bp);
    }
    return out;
}

}  // namespace vloc
