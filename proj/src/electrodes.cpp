#include "vloc/fwd/electrodes.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace vloc {

void ElectrodeLayout::validate() const {
    int n_present = 0;
    for (int r = 0; r < kRows; ++r)
        for (int c = 0; c < kCols; ++c) {
            if (present[static_cast<size_t>(r * kCols + c)]) {
                ++n_present;
                if (armpit_slot(r, c))
                    throw std::runtime_error("electrode layout: electrode inside the armpit mask");
            }
        }
    if (n_present != 200 || static_cast<int>(positions.size()) != 200)
        throw std::runtime_error("electrode layout: expected exactly 200 electrodes");
}

ElectrodeLayout build_electrode_layout(const TorsoModel& torso) {
    ElectrodeLayout out;
    const double z_hi = torso.band_hi * torso.height;
    const double z_lo = torso.band_lo * torso.height;
    for (int r = 0; r < ElectrodeLayout::kRows; ++r) {
        const double z = z_hi - (z_hi - z_lo) * r / (ElectrodeLayout::kRows - 1);  // row 0 on top
        // Arc-length table of the cross-section at this height.
        const int n_dense = 2048;
        std::vector<double> arc(n_dense + 1, 0.0);
        std::vector<Vec3> pts(n_dense + 1);
        for (int i = 0; i <= n_dense; ++i) {
            pts[static_cast<size_t>(i)] = torso.section_point(z, 2.0 * M_PI * i / n_dense);
            if (i > 0)
                arc[static_cast<size_t>(i)] =
                    arc[static_cast<size_t>(i - 1)] +
                    (pts[static_cast<size_t>(i)] - pts[static_cast<size_t>(i - 1)]).norm();
        }
        const double total = arc.back();
        for (int c = 0; c < ElectrodeLayout::kCols; ++c) {
            const int s = r * ElectrodeLayout::kCols + c;
            if (ElectrodeLayout::armpit_slot(r, c)) continue;
            const double target = total * c / ElectrodeLayout::kCols;
            const auto it = std::lower_bound(arc.begin(), arc.end(), target);
            const size_t i = std::min<size_t>(static_cast<size_t>(it - arc.begin()), n_dense);
            const BaryPoint bp = nearest_surface_point(torso.surface, pts[i]);
            out.positions.push_back(bp.point(torso.surface));
            out.bary.push_back(bp);
            out.slot.push_back(s);
            out.present[static_cast<size_t>(s)] = true;
        }
    }
    out.validate();
    return out;
}

ElectrodeLayout project_electrodes(const TorsoModel& reference, const ElectrodeLayout& layout,
                                   const TriMesh& patient) {
    const Vec3 ref_c = reference.centroid();
    // x/y alignment by centroids; z by the vertical heart anchor, proxied by
    // the surface centroid offset for synthetic torsos.
    const Vec3 pat_c = patient.centroid();
    const Vec3 shift(pat_c.x() - ref_c.x(), pat_c.y() - ref_c.y(), pat_c.z() - ref_c.z());

    ElectrodeLayout out = layout;
    std::vector<int> missed;
    for (int e = 0; e < layout.n_electrodes(); ++e) {
        const Vec3 pos = layout.positions[static_cast<size_t>(e)];
        const Vec3 inner =
            ref_c + Vec3(0.7 * (pos.x() - ref_c.x()), 0.5 * (pos.y() - ref_c.y()), pos.z() - ref_c.z());
        Vec3 dir = pos - inner;
        if (dir.norm() < 1e-9) {
            missed.push_back(e);
            continue;
        }
        dir.normalize();
        const Vec3 origin = inner + shift;
        double t_hit;
        int tri_hit;
        if (!ray_mesh_intersect(patient, origin, dir, t_hit, &tri_hit)) {
            missed.push_back(e);
            continue;
        }
        const Vec3 landing = origin + t_hit * dir;
        const BaryPoint bp = nearest_surface_point(patient, landing);
        out.positions[static_cast<size_t>(e)] = bp.point(patient);
        out.bary[static_cast<size_t>(e)] = bp;
    }
    if (!missed.empty()) {
        std::ostringstream oss;
        oss << "projection-miss:";
        for (int e : missed) oss << " " << e;
        throw std::runtime_error(oss.str());
    }
    return out;
}

}  // namespace vloc
