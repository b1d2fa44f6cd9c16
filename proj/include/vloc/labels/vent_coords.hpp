#pragma once

#include "vloc/heart/heart_model.hpp"
#include "vloc/mesh/barycentric.hpp"

namespace vloc {

// Normalized ventricular position: binary transventricular (v) and
// transmural (m) coordinates, continuous apicobasal (a), rotational encoded
// as sine/cosine to stay continuous across the posterior junction where the
// raw coordinate wraps.
struct VentCoord {
    double v = 0;      // 0 = LV, 1 = RV
    double m = 0;      // 0 = endo, 1 = epi
    double a = 0;      // apex 0 -> base 1
    double r_sin = 0;
    double r_cos = 1;
    void validate() const;
};

// Coordinates of a surface point: v/m from the triangle's wall labels, a and
// sin/cos of r interpolated barycentrically (with renormalization).
VentCoord encode_origin_coords(const CoordSurface& surf, const BaryPoint& origin);

struct SurfacePoint {
    Vec3 point;
    BaryPoint bary;
};

// Point on the target surface (restricted to triangles matching the
// binarized v/m) minimizing the loss-weighted coordinate metric
// 6.25 (a-a')^2 + a [(sin-sin')^2 + (cos-cos')^2], refined continuously
// within the best triangle. Throws "empty matching surface" when the (v,m)
// filter selects nothing.
SurfacePoint coords_to_point(const VentCoord& c, const CoordSurface& target);

}  // namespace vloc
