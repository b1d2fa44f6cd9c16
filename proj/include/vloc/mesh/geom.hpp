#pragma once

#include <Eigen/Dense>

namespace vloc {

// Lengths are millimetres throughout the project.
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

inline Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c) {
    Vec3 n = (b - a).cross(c - a);
    const double len = n.norm();
    return len > 0.0 ? Vec3(n / len) : Vec3(0, 0, 0);
}

// Signed volume of tet (a,b,c,d); positive when d lies on the side the
// right-handed normal of (a,b,c) points to.
inline double tet_signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    return (b - a).cross(c - a).dot(d - a) / 6.0;
}

// Rotation by angle (radians) about a unit axis, Rodrigues form.
inline Mat3 axis_angle(const Vec3& axis, double angle) {
    return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

inline double deg2rad(double d) { return d * 0.017453292519943295; }

}  // namespace vloc
