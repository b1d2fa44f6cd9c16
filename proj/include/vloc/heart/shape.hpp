#pragma once

#include <vector>

#include "vloc/mesh/geom.hpp"

namespace vloc {

// Dimensionless shape coefficients in [-3,3], interpreted as standard
// deviations of the parametric shape family.
struct ShapeParams {
    std::vector<double> weights;  // size kNumShapeWeights, zero = mean shape

    static constexpr int kNumShapeWeights = 11;
    static ShapeParams mean() { return {std::vector<double>(kNumShapeWeights, 0.0)}; }
    void validate() const;
};

// Geometric parameters of the bi-ventricular solid, all in mm/degrees.
// LV = thick truncated-ellipsoid shell; RV = crescent shell of fixed wall
// thickness wrapped around the LV free wall; both cut by a (tiltable) base
// plane. Local frame: long axis = +z (apex at -z), RV offset toward +x,
// anterior toward +y.
struct ShapeGeometry {
    double lv_ra, lv_rb, lv_len;    // LV endo semi-axes (x, y, z)
    double wall_lat, wall_apex;     // LV wall thickness, lateral / apical
    double base_frac;               // base plane height, fraction of lv_len
    double tilt_deg;                // base plane tilt about y
    double rv_scale;                // RV epi size factor
    double rv_dx, rv_dz;            // RV ellipsoid center offset
    double rv_wrap;                 // RV epi y-axis relative to its x-axis
    double rv_wall;                 // RV wall thickness (config, default 3 mm)

    static ShapeGeometry from_params(const ShapeParams& p, double rv_wall_mm);
};

// Implicit evaluator of the bi-ventricular solid plus its normalized
// coordinate fields. All signed values are approximate distances in mm
// (negative inside).
class BiventricularShape {
  public:
    explicit BiventricularShape(const ShapeGeometry& g);

    enum class Region { Outside, Myocardium, LVCavity, RVCavity };

    double myocardium(const Vec3& p) const;           // signed, <0 inside
    double lv_cavity(const Vec3& p) const;            // anatomical cavity
    double rv_cavity(const Vec3& p) const;
    double lv_cavity_eroded(const Vec3& p, double delta) const;  // blood compartment
    double rv_cavity_eroded(const Vec3& p, double delta) const;
    Region region(const Vec3& p) const;

    // Normalized ventricular coordinate fields.
    bool rv_free_wall(const Vec3& p) const;            // v: true = RV
    double transmural(const Vec3& p) const;            // continuous, endo 0 -> epi 1
    double apicobasal(const Vec3& p) const;            // apex 0 -> base 1
    double rotational(const Vec3& p) const;            // [0,1), jumps at posterior junction

    // Construction coordinate for the fiber rule: radial interpolation in the
    // LV frame, globally smooth (the thin RV free wall saturates at the
    // epicardial angle).
    double construction_transmural(const Vec3& p) const;

    // Local frame for fiber construction.
    Vec3 transmural_dir(const Vec3& p) const;          // unit, endo -> epi
    Vec3 circumferential_dir(const Vec3& p) const;

    double base_plane_signed(const Vec3& p) const;     // >0 above the base plane
    double outer_signed(const Vec3& p) const;          // union of the epi ellipsoids
    double posterior_junction_angle() const { return phi_post_; }

    const ShapeGeometry& geometry() const { return geo_; }

    // Axis-aligned bounding box of the solid with a margin.
    void bounding_box(Vec3& lo, Vec3& hi, double margin) const;

  private:
    ShapeGeometry geo_;
    Vec3 lv_center_{0, 0, 0};
    Vec3 rv_center_;
    Vec3 lv_endo_ax_, lv_epi_ax_, rv_endo_ax_, rv_epi_ax_;
    Vec3 base_point_, base_normal_;
    double phi_post_ = 0.0;  // angle of the posterior septum/free-wall junction

    static double ellipsoid_signed(const Vec3& p, const Vec3& c, const Vec3& ax);
    static double ellipsoid_rho(const Vec3& p, const Vec3& c, const Vec3& ax);
};

}  // namespace vloc
