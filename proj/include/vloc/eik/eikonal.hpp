#pragma once

#include <vector>

#include "vloc/heart/heart_model.hpp"
#include "vloc/mesh/barycentric.hpp"

namespace vloc {

struct ConductionParams {
    double v_fiber = 0.6;        // m/s == mm/ms along the fiber
    double anisotropy_ratio = 2.7;  // along / across
    void validate() const;
};

// Scale by cv_scale, then shift. Scale 1 / shift 0 is the identity.
struct AugmentParams {
    double cv_scale = 1.0;  // [0.5, 1.5]
    double shift_ms = 0.0;  // [0, 100]
    void validate() const;
};

// First-arrival activation times on the heart volume mesh, in ms.
struct ATMap {
    std::vector<double> at;     // per tet-mesh vertex
    BaryPoint origin;           // on heart.surf
    WallClass origin_wall = WallClass::Epi;

    double min_at() const;
    double max_at() const;
};

struct EikonalOptions {
    double tolerance_ms = 1e-4;
    long max_updates_per_vertex = 200;  // exceeded -> "eikonal-diverged"
};

// Anisotropic eikonal solve with the fast iterative method. Speed is v_fiber
// along the per-tet fiber direction and v_fiber / anisotropy_ratio across it.
// The origin is a point on heart.surf; its triangle's vertices are seeded
// with their metric distance from the origin point.
ATMap solve_eikonal(const HeartModel& heart, const ConductionParams& params,
                    const BaryPoint& origin, const EikonalOptions& opt = {});

void augment_at(ATMap& at, const AugmentParams& aug);

}  // namespace vloc
