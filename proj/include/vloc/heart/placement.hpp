#pragma once

#include <optional>

#include "vloc/heart/heart_model.hpp"
#include "vloc/heart/torso.hpp"

namespace vloc {

// Pose variation inside the torso. Rotations are about the heart centroid;
// chest_distance is the absolute heart-chest gap along +y (empty = keep the
// current distance, so a default-constructed params is the identity).
struct PlacementParams {
    double roll_deg = 0.0;   // about the heart's long axis, [-20, 20]
    double yaw_deg = 0.0;    // about the global z axis, [-20, 20]
    double pitch_deg = 0.0;  // about cross(z, long axis), [-20, 20]
    double dx = 0.0;         // mm, [-20, 20]
    double dz = 0.0;         // mm, [-20, 20]
    std::optional<double> chest_distance;  // mm, [12, 52]
    void validate() const;
};

// Moves a freshly generated heart to its baseline pose inside the torso
// (fixed anatomical orientation, centroid on the torso axis at the torso's
// heart anchor height, mid-range chest distance).
void place_heart_baseline(HeartModel& heart, const TorsoModel& torso);

// Applies roll/yaw/pitch about the heart centroid (in that order), then the
// translations. Throws "heart-outside-torso" when any surface vertex leaves
// the torso; callers resample.
void place_heart(HeartModel& heart, const TorsoModel& torso, const PlacementParams& p);

// Current heart-chest distance: gap along +y between the anterior-most heart
// surface point and the torso wall.
double chest_distance(const HeartModel& heart, const TorsoModel& torso);

}  // namespace vloc
