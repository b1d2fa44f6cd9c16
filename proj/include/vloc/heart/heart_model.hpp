#pragma once

#include <cstdint>
#include <string>

#include "vloc/heart/shape.hpp"
#include "vloc/mesh/tetmesh.hpp"

namespace vloc {

// Fiber angles in degrees on the endo- and epicardial surfaces; the angle is
// interpolated linearly in the transmural coordinate.
struct FiberSpec {
    double alpha_endo_deg = 60.0;   // in [40, 80]
    double alpha_epi_deg = -60.0;   // in [-80, -40]
    void validate() const;
};

// Surface view carrying the normalized coordinates used by the label codec:
// per-vertex apicobasal / rotational(sin,cos) fields and per-triangle binary
// transventricular (v) and transmural (m) labels.
struct CoordSurface {
    TriMesh mesh;
    std::vector<double> a, rsin, rcos;   // per vertex
    std::vector<uint8_t> tri_v, tri_m;   // per triangle: v 0=LV 1=RV, m 0=endo 1=epi
    double mean_edge = 0.0;
};

struct HeartModel {
    TetMesh tet;                    // classified boundary (LV-endo, RV-endo, epi, base)
    std::vector<Vec3> fibers;       // per tet, unit length
    ShapeGeometry geometry;

    // Per-vertex coordinate fields (intrinsic; invariant under placement).
    std::vector<double> coord_a, coord_rsin, coord_rcos, coord_m;
    std::vector<uint8_t> coord_v;

    // Closed blood-compartment surfaces, slightly eroded from the endocardium
    // to keep the BEM kernels off the source surface.
    TriMesh lv_blood, rv_blood;

    // Epi + endo surfaces merged (no base), for origin sampling and label
    // transfer. surf_vertex_map maps surface vertices to tet-mesh vertices.
    CoordSurface surf;
    std::vector<int> surf_vertex_map;
    std::vector<WallClass> surf_tri_wall;

    TriMesh wall_surface(WallClass wall, std::vector<int>* vertex_map = nullptr) const {
        return tet.surface(wall, vertex_map);
    }

    Vec3 centroid() const;
    Vec3 long_axis() const { return frame_R.col(2); }  // local +z in world

    // Rigid placement bookkeeping (world = R * local + t).
    Mat3 frame_R = Mat3::Identity();
    Vec3 frame_t = Vec3::Zero();
    void apply_rigid(const Mat3& R, const Vec3& t);
};

struct HeartGenOptions {
    double resolution = 2.0;        // volume mesh target edge length, mm
    double cavity_resolution = 4.0; // blood surface lattice, mm
    double cavity_erosion = 1.2;    // mm pulled in from the endocardium
    double rv_wall = 3.0;           // mm
    bool want_fields = true;        // coordinate fields + surfaces
};

// Parametric bi-ventricular generator. Deterministic in its arguments;
// throws "invalid-shape" for self-intersecting/degenerate configurations.
HeartModel generate_heart(const ShapeParams& params, const HeartGenOptions& opt);

// Classifies boundary faces and vertices of a lattice-meshed bi-ventricular
// solid by probing the implicit regions; shared by the heart generator and
// the coarse class-mesh builder. Throws "invalid-shape" when a wall class
// is (nearly) empty.
void classify_heart_boundary(const BiventricularShape& shape, TetMesh& tet, double h);

// Rule-based fiber field: alpha(m) = alpha_endo + m (alpha_epi - alpha_endo),
// rotated about the local transmural axis from the local circumferential
// direction. Stores unit vectors into heart.fibers.
void assign_fibers(HeartModel& heart, const FiberSpec& spec);

void save_heart(const HeartModel& h, const std::string& basename);
HeartModel load_heart(const std::string& basename);

}  // namespace vloc
