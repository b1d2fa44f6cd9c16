#include "vloc/heart/shape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vloc {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct WeightSpec {
    double mean;
    double sigma;  // one standard deviation; +-3 sigma spans the family
};

// Ranges chosen so +-3 sigma spans physiologic variation of the family.
constexpr WeightSpec kWeightTable[ShapeParams::kNumShapeWeights] = {
    {23.0, 5.0 / 3},   // lv_ra
    {23.0, 5.0 / 3},   // lv_rb
    {55.0, 8.0 / 3},   // lv_len
    {10.0, 2.5 / 3},   // wall_lat
    {8.0, 2.0 / 3},    // wall_apex
    {0.34, 0.08 / 3},  // base_frac
    {0.0, 8.0 / 3},    // tilt_deg
    {1.0, 0.10 / 3},   // rv_scale
    {14.0, 3.5 / 3},   // rv_dx
    {4.0, 4.0 / 3},    // rv_dz
    {0.85, 0.07 / 3},  // rv_wrap
};

}  // namespace

void ShapeParams::validate() const {
    if (static_cast<int>(weights.size()) != kNumShapeWeights)
        throw std::runtime_error("shape params: expected 11 weights");
    for (double w : weights)
        if (!(w >= -3.0 && w <= 3.0)) throw std::runtime_error("shape params: weight outside [-3,3]");
}

ShapeGeometry ShapeGeometry::from_params(const ShapeParams& p, double rv_wall_mm) {
    p.validate();
    double v[ShapeParams::kNumShapeWeights];
    for (int i = 0; i < ShapeParams::kNumShapeWeights; ++i)
        v[i] = kWeightTable[i].mean + p.weights[static_cast<size_t>(i)] * kWeightTable[i].sigma;
    ShapeGeometry g;
    g.lv_ra = v[0];
    g.lv_rb = v[1];
    g.lv_len = v[2];
    g.wall_lat = v[3];
    g.wall_apex = v[4];
    g.base_frac = v[5];
    g.tilt_deg = v[6];
    g.rv_scale = v[7];
    g.rv_dx = v[8];
    g.rv_dz = v[9];
    g.rv_wrap = v[10];
    g.rv_wall = rv_wall_mm;
    return g;
}

BiventricularShape::BiventricularShape(const ShapeGeometry& g) : geo_(g) {
    lv_endo_ax_ = Vec3(g.lv_ra, g.lv_rb, g.lv_len);
    lv_epi_ax_ = Vec3(g.lv_ra + g.wall_lat, g.lv_rb + g.wall_lat, g.lv_len + g.wall_apex);
    rv_center_ = Vec3(g.rv_dx, 0.0, g.rv_dz);
    rv_epi_ax_ = g.rv_scale * Vec3(1.04 * lv_epi_ax_.x(), g.rv_wrap * lv_epi_ax_.y(), 0.88 * lv_epi_ax_.z());
    rv_endo_ax_ = rv_epi_ax_ - Vec3(g.rv_wall, g.rv_wall, g.rv_wall);
    if (rv_endo_ax_.minCoeff() <= 1.0) throw std::runtime_error("invalid-shape: rv wall exceeds rv size");

    base_point_ = Vec3(0, 0, g.base_frac * g.lv_len);
    const double t = deg2rad(g.tilt_deg);
    base_normal_ = Vec3(std::sin(t), 0, std::cos(t));

    // Posterior junction: angle on the LV epi equator (z at the RV center
    // height) where the RV epi ellipsoid crosses the LV epi surface.
    const double z = std::clamp(rv_center_.z(), -0.5 * lv_epi_ax_.z(), base_point_.z());
    const double shrink = std::sqrt(std::max(1e-9, 1.0 - (z / lv_epi_ax_.z()) * (z / lv_epi_ax_.z())));
    const double az = lv_epi_ax_.x() * shrink, bz = lv_epi_ax_.y() * shrink;
    auto crossing = [&](double phi) {
        const Vec3 p(az * std::cos(phi), bz * std::sin(phi), z);
        return ellipsoid_rho(p, rv_center_, rv_epi_ax_) - 1.0;
    };
    if (crossing(0.0) >= 0.0) throw std::runtime_error("invalid-shape: rv does not wrap the lv free wall");
    double lo = -3.14159, hi = 0.0;  // search the y<0 half
    if (crossing(lo) <= 0.0) throw std::runtime_error("invalid-shape: rv reaches around the lv");
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (crossing(mid) > 0.0 ? lo : hi) = mid;
    }
    phi_post_ = 0.5 * (lo + hi);
}

double BiventricularShape::ellipsoid_rho(const Vec3& p, const Vec3& c, const Vec3& ax) {
    const Vec3 d = p - c;
    const double q = (d.x() / ax.x()) * (d.x() / ax.x()) + (d.y() / ax.y()) * (d.y() / ax.y()) +
                     (d.z() / ax.z()) * (d.z() / ax.z());
    return std::sqrt(q);
}

// First-order signed distance: |p-c| (1 - 1/rho), negative inside.
double BiventricularShape::ellipsoid_signed(const Vec3& p, const Vec3& c, const Vec3& ax) {
    const double rho = ellipsoid_rho(p, c, ax);
    const double r = (p - c).norm();
    if (rho < 1e-12) return -ax.minCoeff();
    return r * (1.0 - 1.0 / rho);
}

double BiventricularShape::base_plane_signed(const Vec3& p) const {
    return (p - base_point_).dot(base_normal_);
}

double BiventricularShape::outer_signed(const Vec3& p) const {
    return std::min(ellipsoid_signed(p, lv_center_, lv_epi_ax_),
                    ellipsoid_signed(p, rv_center_, rv_epi_ax_));
}

double BiventricularShape::myocardium(const Vec3& p) const {
    const double lv_epi = ellipsoid_signed(p, lv_center_, lv_epi_ax_);
    const double lv_endo = ellipsoid_signed(p, lv_center_, lv_endo_ax_);
    const double rv_epi = ellipsoid_signed(p, rv_center_, rv_epi_ax_);
    const double rv_endo = ellipsoid_signed(p, rv_center_, rv_endo_ax_);
    const double lv_shell = std::max(lv_epi, -lv_endo);
    const double rv_shell = std::max({rv_epi, -rv_endo, -lv_endo});
    return std::max(std::min(lv_shell, rv_shell), base_plane_signed(p));
}

double BiventricularShape::lv_cavity(const Vec3& p) const {
    return std::max(ellipsoid_signed(p, lv_center_, lv_endo_ax_), base_plane_signed(p));
}

double BiventricularShape::rv_cavity(const Vec3& p) const {
    const double rv_endo = ellipsoid_signed(p, rv_center_, rv_endo_ax_);
    const double lv_epi = ellipsoid_signed(p, lv_center_, lv_epi_ax_);
    return std::max({rv_endo, -lv_epi, base_plane_signed(p)});
}

double BiventricularShape::lv_cavity_eroded(const Vec3& p, double delta) const {
    return lv_cavity(p) + delta;
}

double BiventricularShape::rv_cavity_eroded(const Vec3& p, double delta) const {
    return rv_cavity(p) + delta;
}

BiventricularShape::Region BiventricularShape::region(const Vec3& p) const {
    if (myocardium(p) <= 0) return Region::Myocardium;
    if (lv_cavity(p) <= 0) return Region::LVCavity;
    if (rv_cavity(p) <= 0) return Region::RVCavity;
    return Region::Outside;
}

bool BiventricularShape::rv_free_wall(const Vec3& p) const {
    const double lv_shell = std::max(ellipsoid_signed(p, lv_center_, lv_epi_ax_),
                                     -ellipsoid_signed(p, lv_center_, lv_endo_ax_));
    if (lv_shell <= 0) return false;  // septum and LV wall count as LV
    const double rv_shell = std::max({ellipsoid_signed(p, rv_center_, rv_epi_ax_),
                                      -ellipsoid_signed(p, rv_center_, rv_endo_ax_)});
    return rv_shell <= 0.75;  // tolerance: boundary vertices sit on the surface
}

double BiventricularShape::transmural(const Vec3& p) const {
    // Distance blend between the endocardial surfaces (0) and the outer hull
    // (1). Continuous across the LV/RV junction, which keeps the fiber field
    // smooth; the septal RV-facing surface counts as endocardium.
    const double lv_endo = ellipsoid_signed(p, lv_center_, lv_endo_ax_);
    const double lv_epi = ellipsoid_signed(p, lv_center_, lv_epi_ax_);
    const double rv_endo = ellipsoid_signed(p, rv_center_, rv_endo_ax_);
    const double rv_epi = ellipsoid_signed(p, rv_center_, rv_epi_ax_);
    // RV cavity proxy without the base cut; the -lv_epi term suppresses the
    // phantom RV-endo ellipsoid inside the LV wall.
    const double d_endo = std::min(std::abs(lv_endo), std::abs(std::max(rv_endo, -lv_epi)));
    const double d_epi = std::abs(std::min(lv_epi, rv_epi));  // outer hull
    if (d_endo + d_epi < 1e-9) return 0.5;
    return std::clamp(d_endo / (d_endo + d_epi), 0.0, 1.0);
}

double BiventricularShape::apicobasal(const Vec3& p) const {
    const double z_apex = -lv_epi_ax_.z();
    // Base plane tilts about y: its height depends on x only.
    const double z_base = base_point_.z() - (base_normal_.x() / base_normal_.z()) * p.x();
    return std::clamp((p.z() - z_apex) / std::max(1.0, z_base - z_apex), 0.0, 1.0);
}

double BiventricularShape::rotational(const Vec3& p) const {
    const double phi = std::atan2(p.y(), p.x());
    double r = (phi - phi_post_) / kTwoPi;
    r -= std::floor(r);
    return r;
}

double BiventricularShape::construction_transmural(const Vec3& p) const {
    const double rho_endo = ellipsoid_rho(p, lv_center_, lv_endo_ax_);
    const double rho_epi = ellipsoid_rho(p, lv_center_, lv_epi_ax_);
    if (rho_endo < 1e-9) return 0.0;
    // Along the ray from the LV center through p, the endo surface sits at
    // parameter 1/rho_endo and the epi surface at 1/rho_epi (p itself at 1).
    const double t_endo = 1.0 / rho_endo, t_epi = 1.0 / rho_epi;
    if (t_epi - t_endo < 1e-9) return 0.5;
    return std::clamp((1.0 - t_endo) / (t_epi - t_endo), 0.0, 1.0);
}

Vec3 BiventricularShape::transmural_dir(const Vec3& p) const {
    // Outward normal of the interpolated LV ellipsoid through p.
    const double m = construction_transmural(p);
    const Vec3 ax = lv_endo_ax_ + m * (lv_epi_ax_ - lv_endo_ax_);
    const Vec3 d = p - lv_center_;
    Vec3 g(d.x() / (ax.x() * ax.x()), d.y() / (ax.y() * ax.y()), d.z() / (ax.z() * ax.z()));
    const double n = g.norm();
    if (n < 1e-12) return Vec3(0, 0, -1);  // exact center: point apexward
    return g / n;
}

Vec3 BiventricularShape::circumferential_dir(const Vec3& p) const {
    const Vec3 n = transmural_dir(p);
    Vec3 c = Vec3(0, 0, 1).cross(n);
    if (c.norm() < 1e-6) c = Vec3(1, 0, 0).cross(n);  // apex fallback
    return c.normalized();
}

void BiventricularShape::bounding_box(Vec3& lo, Vec3& hi, double margin) const {
    lo = lv_center_ - lv_epi_ax_;
    hi = lv_center_ + lv_epi_ax_;
    lo = lo.cwiseMin(rv_center_ - rv_epi_ax_);
    hi = hi.cwiseMax(rv_center_ + rv_epi_ax_);
    hi.z() = std::min(hi.z(), base_point_.z() + std::abs(base_normal_.x()) * hi.x() + 1.0);
    lo -= Vec3(margin, margin, margin);
    hi += Vec3(margin, margin, margin);
}

}  // namespace vloc
