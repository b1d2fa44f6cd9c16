#include "vloc/heart/placement.hpp"

#include <cmath>
#include <stdexcept>

namespace vloc {

void PlacementParams::validate() const {
    auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
    if (!in(roll_deg, -20, 20) || !in(yaw_deg, -20, 20) || !in(pitch_deg, -20, 20))
        throw std::runtime_error("placement: rotation outside [-20,20] deg");
    if (!in(dx, -20, 20) || !in(dz, -20, 20))
        throw std::runtime_error("placement: translation outside [-20,20] mm");
    if (chest_distance && !in(*chest_distance, 12, 52))
        throw std::runtime_error("placement: chest distance outside [12,52] mm");
}

namespace {

// Baseline orientation: apex toward the patient's lower left front.
Mat3 baseline_rotation() {
    const Vec3 apex_dir = Vec3(0.50, 0.35, -0.79).normalized();
    const Vec3 long_axis = -apex_dir;  // local +z (apex -> base) in world
    Vec3 rv_dir = Vec3(-0.55, 0.72, 0.2);  // local +x: RV sits right-anterior
    rv_dir = (rv_dir - rv_dir.dot(long_axis) * long_axis).normalized();
    Mat3 R;
    R.col(0) = rv_dir;
    R.col(1) = long_axis.cross(rv_dir);
    R.col(2) = long_axis;
    return R;
}

}  // namespace

double chest_distance(const HeartModel& heart, const TorsoModel& torso) {
    double best_y = -1e300;
    Vec3 anterior;
    for (const auto& bf : heart.tet.boundary) {
        for (int m = 0; m < 3; ++m) {
            const Vec3& v = heart.tet.vertices[bf.verts[m]];
            if (v.y() > best_y) {
                best_y = v.y();
                anterior = v;
            }
        }
    }
    double t;
    if (!ray_mesh_intersect(torso.surface, anterior, Vec3(0, 1, 0), t))
        throw std::runtime_error("chest_distance: heart not in front of torso wall");
    return t;
}

void place_heart_baseline(HeartModel& heart, const TorsoModel& torso) {
    const Mat3 R = baseline_rotation();
    const Vec3 c = heart.centroid();
    heart.apply_rigid(R, c - R * c);  // rotate about centroid
    const Vec3 anchor(0, 10.0, torso.heart_z_frac * torso.height);
    heart.apply_rigid(Mat3::Identity(), anchor - heart.centroid());
    // Mid-range chest distance as the baseline.
    const double gap = chest_distance(heart, torso);
    heart.apply_rigid(Mat3::Identity(), Vec3(0, gap - 32.0, 0));
}

void place_heart(HeartModel& heart, const TorsoModel& torso, const PlacementParams& p) {
    p.validate();
    const Vec3 c = heart.centroid();
    const Vec3 long_axis = heart.long_axis();

    const Mat3 r_roll = axis_angle(long_axis, deg2rad(p.roll_deg));
    const Mat3 r_yaw = axis_angle(Vec3(0, 0, 1), deg2rad(p.yaw_deg));
    Vec3 pitch_axis = Vec3(0, 0, 1).cross(long_axis);
    if (pitch_axis.norm() < 1e-9) pitch_axis = Vec3(1, 0, 0);
    pitch_axis.normalize();
    const Mat3 r_pitch = axis_angle(pitch_axis, deg2rad(p.pitch_deg));

    const Mat3 R = r_pitch * r_yaw * r_roll;
    heart.apply_rigid(R, c - R * c);
    heart.apply_rigid(Mat3::Identity(), Vec3(p.dx, 0, p.dz));
    if (p.chest_distance) {
        const double gap = chest_distance(heart, torso);
        heart.apply_rigid(Mat3::Identity(), Vec3(0, gap - *p.chest_distance, 0));
    }

    for (const auto& bf : heart.tet.boundary) {
        for (int m = 0; m < 3; ++m) {
            if (!point_inside_mesh(torso.surface, heart.tet.vertices[bf.verts[m]]))
                throw std::runtime_error("heart-outside-torso");
        }
    }
}

}  // namespace vloc
