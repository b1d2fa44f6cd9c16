#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "vloc/core/rng.hpp"
#include "vloc/heart/halton.hpp"
#include "vloc/heart/heart_model.hpp"
#include "vloc/heart/lattice.hpp"
#include "vloc/heart/param_sampler.hpp"
#include "vloc/heart/placement.hpp"
#include "vloc/heart/torso.hpp"

using namespace vloc;

namespace {

HeartModel& test_heart() {
    // Meshing is the slow part; share one mean-shape heart across cases.
    static HeartModel heart = [] {
        HeartGenOptions opt;
        opt.resolution = 2.5;
        HeartModel h = generate_heart(ShapeParams::mean(), opt);
        assign_fibers(h, FiberSpec{});
        return h;
    }();
    return heart;
}

}  // namespace

TEST_CASE("halton: unscrambled radical inverse values") {
    HaltonSampler h(2, 0, /*scrambled=*/false);
    const auto p1 = h.next();
    CHECK(p1[0] == doctest::Approx(0.5));
    CHECK(p1[1] == doctest::Approx(1.0 / 3));
    CHECK(h.next()[0] == doctest::Approx(0.25));
    CHECK(h.next()[0] == doctest::Approx(0.75));
    CHECK(h.next()[0] == doctest::Approx(0.125));
}

TEST_CASE("halton: outputs in [0,1), deterministic, scrambling permutes digits") {
    HaltonSampler a(4, 7), b(4, 7), c(4, 8);
    bool any_differs = false;
    for (int i = 0; i < 200; ++i) {
        const auto pa = a.next(), pb = b.next(), pc = c.next();
        for (int d = 0; d < 4; ++d) {
            CHECK(pa[d] >= 0.0);
            CHECK(pa[d] < 1.0);
            CHECK(pa[d] == pb[d]);
            any_differs |= pa[d] != pc[d];
        }
    }
    CHECK(any_differs);
}

TEST_CASE("halton: lower star-discrepancy than pseudo-random at n=2^10") {
    // Approximate star discrepancy with a fixed family of anchored boxes.
    const int n = 1024, d = 3;
    HaltonSampler halton(d, 3);
    Rng rng(3);
    std::vector<std::vector<double>> hp, rp;
    for (int i = 0; i < n; ++i) {
        hp.push_back(halton.next());
        std::vector<double> r(d);
        for (auto& v : r) v = rng.uniform();
        rp.push_back(r);
    }
    auto discrepancy = [&](const std::vector<std::vector<double>>& pts) {
        Rng box_rng(99);
        double worst = 0.0;
        for (int b = 0; b < 3000; ++b) {
            double corner[3], vol = 1.0;
            for (int k = 0; k < d; ++k) {
                corner[k] = box_rng.uniform();
                vol *= corner[k];
            }
            int inside = 0;
            for (const auto& p : pts) {
                bool in = true;
                for (int k = 0; k < d; ++k) in &= p[static_cast<size_t>(k)] < corner[k];
                inside += in;
            }
            worst = std::max(worst, std::abs(inside / static_cast<double>(n) - vol));
        }
        return worst;
    };
    CHECK(discrepancy(hp) < discrepancy(rp));
}

TEST_CASE("generate_heart: mean shape is valid, classified and closed") {
    const HeartModel& h = test_heart();
    h.tet.validate();
    CHECK(h.tet.n_vertices() > 2000);

    int n_lv = 0, n_rv = 0, n_epi = 0, n_base = 0;
    for (const auto& bf : h.tet.boundary) {
        switch (bf.wall) {
            case WallClass::LVEndo: ++n_lv; break;
            case WallClass::RVEndo: ++n_rv; break;
            case WallClass::Epi: ++n_epi; break;
            case WallClass::Base: ++n_base; break;
        }
    }
    CHECK(n_lv > 100);
    CHECK(n_rv > 100);
    CHECK(n_epi > 300);
    CHECK(n_base > 50);

    // Union of all wall classes is a closed 2-manifold of genus 0.
    const TriMesh full = h.tet.surface(std::nullopt);
    CHECK(full.is_closed_manifold());
    CHECK(full.euler_characteristic() == 2);

    // Blood compartments are closed and sit strictly inside the cavities.
    CHECK(h.lv_blood.is_watertight());
    CHECK(h.rv_blood.is_watertight());
    CHECK(h.lv_blood.enclosed_volume() > 10000.0);
    CHECK(h.rv_blood.enclosed_volume() > 5000.0);
}

TEST_CASE("generate_heart: bilateral symmetry of the mean LV shell") {
    const HeartModel& h = test_heart();
    const BiventricularShape shape(h.geometry);
    // Construction symmetry about the long-axis (x-z) plane is exact for the
    // LV shell of the mean shape.
    Rng rng(17);
    for (int i = 0; i < 500; ++i) {
        const Vec3 p(rng.uniform(-40, 40), rng.uniform(-40, 40), rng.uniform(-70, 25));
        const Vec3 q(p.x(), -p.y(), p.z());
        CHECK(shape.lv_cavity(p) == doctest::Approx(shape.lv_cavity(q)).epsilon(1e-12));
    }
    // The mesh realizes the implicit within mesh tolerance: LV-endo boundary
    // vertices sit on the zero set up to roughly half a lattice cell.
    int checked = 0, off = 0;
    for (const auto& bf : h.tet.boundary) {
        if (bf.wall != WallClass::LVEndo) continue;
        for (int k = 0; k < 3; ++k) {
            const Vec3& v = h.tet.vertices[bf.verts[k]];
            ++checked;
            if (std::abs(shape.myocardium(v)) > 1.8) ++off;
        }
    }
    CHECK(checked > 500);
    CHECK(static_cast<double>(off) / checked < 0.10);
}

TEST_CASE("generate_heart: distinct weights give distinct meshes") {
    HeartGenOptions opt;
    opt.resolution = 3.0;
    opt.want_fields = false;
    ShapeParams a = ShapeParams::mean();
    ShapeParams b = ShapeParams::mean();
    b.weights[2] = 2.0;  // longer LV
    const HeartModel ha = generate_heart(a, opt);
    const HeartModel hb = generate_heart(b, opt);
    double min_z_a = 1e300, min_z_b = 1e300;
    for (const auto& v : ha.tet.vertices) min_z_a = std::min(min_z_a, v.z());
    for (const auto& v : hb.tet.vertices) min_z_b = std::min(min_z_b, v.z());
    CHECK(std::abs(min_z_a - min_z_b) > 1.0);  // Hausdorff distance > 0
}

TEST_CASE("generate_heart: LV cavity volume converges across resolutions") {
    HeartGenOptions fine;
    fine.resolution = 2.5;
    fine.cavity_resolution = 1.5;
    HeartGenOptions coarse = fine;
    coarse.cavity_resolution = 2.5;
    const HeartModel hf = generate_heart(ShapeParams::mean(), fine);
    const HeartModel hc = generate_heart(ShapeParams::mean(), coarse);
    const double vf = hf.lv_blood.enclosed_volume();
    const double vc = hc.lv_blood.enclosed_volume();
    CHECK(std::abs(vf - vc) / vf < 0.10);
}

TEST_CASE("transmural coordinate and fiber angles") {
    const HeartModel& h = test_heart();
    const BiventricularShape shape(h.geometry);

    // alpha(m) boundary and midpoint cases.
    FiberSpec spec;
    spec.alpha_endo_deg = 60;
    spec.alpha_epi_deg = -60;
    auto alpha = [&](double m) {
        return spec.alpha_endo_deg + m * (spec.alpha_epi_deg - spec.alpha_endo_deg);
    };
    CHECK(alpha(0.0) == doctest::Approx(60.0));
    CHECK(alpha(0.5) == doctest::Approx(0.0));
    CHECK(alpha(1.0) == doctest::Approx(-60.0));
    // linear interpolation at m=0.25 with the widest angles
    CHECK(80.0 + 0.25 * (-80.0 - 80.0) == doctest::Approx(40.0));

    // Transmural field: near 0 on endo faces, near 1 on epi faces. Faces at
    // the basal rim are excluded (the cut plane is neither endo nor epi).
    int checked = 0, off = 0;
    for (const auto& bf : h.tet.boundary) {
        if (bf.wall != WallClass::LVEndo && bf.wall != WallClass::Epi) continue;
        double m = 0, z = 0;
        for (int k = 0; k < 3; ++k) {
            m += h.coord_m[static_cast<size_t>(bf.verts[k])] / 3.0;
            z += h.tet.vertices[bf.verts[k]].z() / 3.0;
        }
        if (shape.base_plane_signed(Vec3(0, 0, z)) > -4.0) continue;  // rim band
        ++checked;
        if (bf.wall == WallClass::LVEndo && m >= 0.30) ++off;
        if (bf.wall == WallClass::Epi && m <= 0.70) ++off;
    }
    CHECK(checked > 500);
    CHECK(static_cast<double>(off) / checked < 0.02);

    // Fibers are unit length.
    for (const auto& f : h.fibers) CHECK(std::abs(f.norm() - 1.0) < 1e-6);
}

TEST_CASE("fiber field continuity across adjacent tets") {
    HeartGenOptions opt;
    opt.resolution = 1.6;  // the 120 deg endo->epi rotation needs ~6 layers
    HeartModel h = generate_heart(ShapeParams::mean(), opt);
    assign_fibers(h, FiberSpec{});
    // Face-adjacent tets: angle between fiber directions < 15 degrees
    // (fibers are axes: sign-invariant comparison).
    std::map<std::array<int, 3>, int> face_owner;
    int violations = 0, pairs = 0;
    for (int t = 0; t < h.tet.n_tets(); ++t) {
        const auto& q = h.tet.tets[static_cast<size_t>(t)];
        constexpr int fo[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
        for (const auto& fi : fo) {
            std::array<int, 3> key = {q[fi[0]], q[fi[1]], q[fi[2]]};
            std::sort(key.begin(), key.end());
            auto [it, inserted] = face_owner.emplace(key, t);
            if (!inserted) {
                const double c = std::abs(h.fibers[static_cast<size_t>(t)].dot(
                    h.fibers[static_cast<size_t>(it->second)]));
                ++pairs;
                if (std::acos(std::min(1.0, c)) > deg2rad(15.0)) ++violations;
            }
        }
    }
    CHECK(pairs > 1000);
    // allow a small tail at the apex singularity
    CHECK(static_cast<double>(violations) / pairs < 0.01);
}

TEST_CASE("placement: identity, inverse roll, chest distance and volume") {
    const TorsoModel torso = make_reference_torso();
    HeartModel h = test_heart();  // copy
    place_heart_baseline(h, torso);
    const double vol0 = h.tet.total_volume();
    const auto v0 = h.tet.vertices;

    SUBCASE("all-zero params are the identity") {
        place_heart(h, torso, PlacementParams{});
        for (size_t i = 0; i < v0.size(); i += 97)
            CHECK((h.tet.vertices[i] - v0[i]).norm() < 1e-9);
    }

    SUBCASE("roll then inverse roll restores vertices") {
        PlacementParams p;
        p.roll_deg = 20;
        place_heart(h, torso, p);
        p.roll_deg = -20;
        place_heart(h, torso, p);
        for (size_t i = 0; i < v0.size(); i += 97)
            CHECK((h.tet.vertices[i] - v0[i]).norm() < 1e-9);
    }

    SUBCASE("chest distance moves the centroid by the requested delta") {
        const double d0 = chest_distance(h, torso);
        const Vec3 c0 = h.centroid();
        PlacementParams p;
        p.chest_distance = d0 + 10.0;
        place_heart(h, torso, p);
        CHECK(std::abs((h.centroid() - c0).norm() - 10.0) < 1e-6);
        CHECK(chest_distance(h, torso) == doctest::Approx(d0 + 10.0).epsilon(1e-6));
    }

    SUBCASE("rigid placement preserves volume") {
        PlacementParams p;
        p.roll_deg = 15;
        p.yaw_deg = -12;
        p.pitch_deg = 8;
        p.dx = 10;
        p.dz = -10;
        place_heart(h, torso, p);
        CHECK(std::abs(h.tet.total_volume() - vol0) / vol0 < 1e-6);
    }
}

TEST_CASE("sample_model_batch: ranges, counts, determinism") {
    const auto batch = sample_model_batch(8, 3, 42);
    CHECK(batch.size() == 24);
    std::set<int> hearts;
    for (const auto& s : batch) {
        hearts.insert(s.heart_index);
        for (double w : s.shape.weights) {
            CHECK(w >= -3.0);
            CHECK(w <= 3.0);
        }
        CHECK(s.fibers.alpha_endo_deg >= 40.0);
        CHECK(s.fibers.alpha_endo_deg <= 80.0);
        CHECK(s.fibers.alpha_epi_deg >= -80.0);
        CHECK(s.fibers.alpha_epi_deg <= -40.0);
        CHECK(*s.placement.chest_distance >= 12.0);
        CHECK(*s.placement.chest_distance <= 52.0);
    }
    CHECK(hearts.size() == 8);

    const auto again = sample_model_batch(8, 3, 42);
    CHECK(again[5].shape.weights == batch[5].shape.weights);
    const auto other = sample_model_batch(8, 3, 43);
    CHECK(other[5].shape.weights != batch[5].shape.weights);
}

TEST_CASE("torso: closed, outward, heart fits inside at baseline") {
    const TorsoModel torso = make_reference_torso();
    CHECK(torso.surface.is_closed_manifold());
    CHECK(torso.surface.enclosed_volume() > 0);
    CHECK(point_inside_mesh(torso.surface, torso.centroid()));
    CHECK(!point_inside_mesh(torso.surface, Vec3(500, 0, 0)));
}
