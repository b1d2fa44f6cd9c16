#pragma once

#include <vector>

#include "vloc/heart/torso.hpp"
#include "vloc/mesh/barycentric.hpp"

namespace vloc {

// 8 rows x 28 columns of grid slots over the torso; 200 electrodes present,
// 24 armpit slots missing. Electrodes live on the torso surface.
struct ElectrodeLayout {
    static constexpr int kRows = 8;
    static constexpr int kCols = 28;
    static constexpr int kSlots = kRows * kCols;  // 224

    std::vector<Vec3> positions;      // present electrodes, row-major order
    std::vector<BaryPoint> bary;      // on the torso surface mesh
    std::vector<int> slot;            // grid slot (row * 28 + col) per electrode
    std::array<bool, kSlots> present{};

    int n_electrodes() const { return static_cast<int>(positions.size()); }
    static bool armpit_slot(int row, int col) {
        return row < 3 && ((col >= 6 && col <= 9) || (col >= 19 && col <= 22));
    }
    void validate() const;
};

// Rows evenly spaced over the torso's electrode band, columns evenly spaced
// in boundary arc length starting at the anterior midline.
ElectrodeLayout build_electrode_layout(const TorsoModel& torso);

// Transfers a reference layout onto another torso: surfaces aligned by
// centroid (x,y) and the vertical heart anchor (z); per-electrode projection
// rays connect each electrode with its image under scaling the reference
// torso by 70% in x and 50% in y about its centroid. Throws
// "projection-miss" listing electrode indices that miss the patient surface.
ElectrodeLayout project_electrodes(const TorsoModel& reference, const ElectrodeLayout& layout,
                                   const TriMesh& patient);

}  // namespace vloc
