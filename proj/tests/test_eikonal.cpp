#include <doctest.h>

#include <cmath>

#include "vloc/core/rng.hpp"
#include "vloc/eik/eikonal.hpp"
#include "vloc/eik/tmv.hpp"
#include "vloc/heart/lattice.hpp"

using namespace vloc;

namespace {

// Box-shaped "heart" with uniform fibers: enough structure for analytic
// eikonal oracles without the full biventricular generator.
HeartModel make_box_heart(const Vec3& size, double h, const Vec3& fiber) {
    HeartModel heart;
    auto f = [&](const Vec3& p) {
        return std::max({std::abs(p.x() - size.x() / 2) - size.x() / 2,
                         std::abs(p.y() - size.y() / 2) - size.y() / 2,
                         std::abs(p.z() - size.z() / 2) - size.z() / 2});
    };
    LatticeOptions opt;
    opt.h = h;
    heart.tet = mesh_implicit(f, Vec3(-h, -h, -h), size + Vec3(h, h, h), opt);
    heart.fibers.assign(heart.tet.tets.size(), fiber.normalized());

    // Surface view: all boundary faces, wall label Epi.
    std::unordered_map<int, int> remap;
    for (const auto& bf : heart.tet.boundary) {
        std::array<int, 3> tri;
        for (int m = 0; m < 3; ++m) {
            auto [it, ins] = remap.emplace(bf.verts[m], static_cast<int>(heart.surf.mesh.vertices.size()));
            if (ins) {
                heart.surf.mesh.vertices.push_back(heart.tet.vertices[bf.verts[m]]);
                heart.surf_vertex_map.push_back(bf.verts[m]);
            }
            tri[m] = it->second;
        }
        heart.surf.mesh.tris.push_back(tri);
        heart.surf_tri_wall.push_back(WallClass::Epi);
        heart.surf.tri_v.push_back(0);
        heart.surf.tri_m.push_back(1);
    }
    heart.surf.mesh.update_areas();
    return heart;
}

BaryPoint corner_origin(const HeartModel& heart, const Vec3& corner) {
    const auto bp = nearest_surface_point(heart.surf.mesh, corner);
    return bp;
}

double analytic_time(const Vec3& d, const Vec3& fiber, double v_f, double ratio) {
    const double v_t = v_f / ratio;
    const Vec3 f = fiber.normalized();
    const double along = d.dot(f);
    const double across2 = (d - along * f).squaredNorm();
    return std::sqrt(along * along / (v_f * v_f) + across2 / (v_t * v_t));
}

}  // namespace

TEST_CASE("eikonal: origin vertex activates at time zero") {
    HeartModel heart = make_box_heart(Vec3(20, 10, 10), 2.0, Vec3(1, 0, 0));
    ConductionParams cp;
    const BaryPoint origin = corner_origin(heart, Vec3(0, 0, 0));
    const ATMap at = solve_eikonal(heart, cp, origin);
    const int ov = heart.tet.nearest_vertex(Vec3(0, 0, 0));
    CHECK(at.at[static_cast<size_t>(ov)] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(at.min_at() >= 0.0);
}

TEST_CASE("eikonal: isotropic box matches Euclidean distance / speed") {
    HeartModel heart = make_box_heart(Vec3(20, 12, 12), 1.5, Vec3(1, 0, 0));
    ConductionParams cp;
    cp.anisotropy_ratio = 1.0;
    const ATMap at = solve_eikonal(heart, cp, corner_origin(heart, Vec3(0, 0, 0)));
    const Vec3 far(20, 12, 12);
    const int fv = heart.tet.nearest_vertex(far);
    const Vec3 p = heart.tet.vertices[static_cast<size_t>(fv)];
    const double expected = p.norm() / 0.6;
    CHECK(std::abs(at.at[static_cast<size_t>(fv)] - expected) / expected < 0.02);
}

TEST_CASE("eikonal: anisotropic speeds along and across the fiber") {
    // Bar along x with fibers along x; compare along-fiber and cross-fiber
    // front arrival against the homogeneous-medium metric.
    HeartModel heart = make_box_heart(Vec3(30, 12, 12), 1.2, Vec3(1, 0, 0));
    ConductionParams cp;  // 0.6 mm/ms, ratio 2.7
    const ATMap at = solve_eikonal(heart, cp, corner_origin(heart, Vec3(0, 0, 0)));

    const int vx = heart.tet.nearest_vertex(Vec3(30, 0, 0));
    const Vec3 px = heart.tet.vertices[static_cast<size_t>(vx)];
    const double ex = analytic_time(px, Vec3(1, 0, 0), 0.6, 2.7);
    CHECK(std::abs(at.at[static_cast<size_t>(vx)] - ex) / ex < 0.03);

    const int vy = heart.tet.nearest_vertex(Vec3(0, 12, 0));
    const Vec3 py = heart.tet.vertices[static_cast<size_t>(vy)];
    const double ey = analytic_time(py, Vec3(1, 0, 0), 0.6, 2.7);
    CHECK(std::abs(at.at[static_cast<size_t>(vy)] - ey) / ey < 0.03);
}

TEST_CASE("eikonal: refinement reduces RMS error (isotropic)") {
    auto rms_err = [](double h) {
        HeartModel heart = make_box_heart(Vec3(16, 10, 10), h, Vec3(1, 0, 0));
        ConductionParams cp;
        cp.anisotropy_ratio = 1.0;
        const ATMap at = solve_eikonal(heart, cp, corner_origin(heart, Vec3(0, 0, 0)));
        double se = 0.0;
        int n = 0;
        for (size_t v = 0; v < heart.tet.vertices.size(); ++v) {
            const double expected = heart.tet.vertices[v].norm() / 0.6;
            if (expected < 4.0) continue;  // skip the seeded neighborhood
            const double rel = (at.at[v] - expected) / expected;
            se += rel * rel;
            ++n;
        }
        return std::sqrt(se / n);
    };
    const double coarse = rms_err(2.4);
    const double fine = rms_err(1.2);
    CHECK(fine < coarse);
}

TEST_CASE("eikonal: causality and Lipschitz bound on edges") {
    HeartModel heart = make_box_heart(Vec3(15, 10, 8), 1.6, Vec3(0.6, 0.8, 0));
    ConductionParams cp;
    const ATMap at = solve_eikonal(heart, cp, corner_origin(heart, Vec3(0, 0, 0)));

    std::vector<std::array<int, 2>> edges;
    std::vector<double> lens;
    heart.tet.edge_graph(edges, lens);
    const double v_min = 0.6 / 2.7;
    std::vector<double> min_neighbor(heart.tet.vertices.size(), 1e300);
    for (size_t e = 0; e < edges.size(); ++e) {
        const double ta = at.at[static_cast<size_t>(edges[e][0])];
        const double tb = at.at[static_cast<size_t>(edges[e][1])];
        CHECK(std::abs(ta - tb) <= lens[e] / v_min * (1.0 + 1e-3) + 1e-6);
        min_neighbor[static_cast<size_t>(edges[e][0])] =
            std::min(min_neighbor[static_cast<size_t>(edges[e][0])], tb);
        min_neighbor[static_cast<size_t>(edges[e][1])] =
            std::min(min_neighbor[static_cast<size_t>(edges[e][1])], ta);
    }
    for (size_t v = 0; v < heart.tet.vertices.size(); ++v) {
        if (at.at[v] <= 1e-6) continue;  // origin seeds
        CHECK(at.at[v] > min_neighbor[v] - 1e-6);
    }
}

TEST_CASE("eikonal: non-convergence guard throws") {
    HeartModel heart = make_box_heart(Vec3(15, 10, 8), 2.0, Vec3(1, 0, 0));
    ConductionParams cp;
    EikonalOptions opt;
    opt.max_updates_per_vertex = 0;
    CHECK_THROWS_WITH_AS(solve_eikonal(heart, cp, corner_origin(heart, Vec3(0, 0, 0)), opt),
                         "eikonal-diverged", std::runtime_error);
}

TEST_CASE("augment_at: identity, scaling, affine composition") {
    ATMap at;
    at.at = {0.0, 40.0, 100.0};

    ATMap id = at;
    augment_at(id, AugmentParams{1.0, 0.0});
    CHECK(id.at == at.at);

    ATMap half = at;
    augment_at(half, AugmentParams{0.5, 0.0});
    CHECK(half.max_at() == doctest::Approx(50.0));

    // scale 1.5 on baseline 0.6 m/s corresponds to 0.9 m/s, inside [0.4,1.2]
    const double cv = 0.6 / (1.0 / 1.5);
    CHECK(cv == doctest::Approx(0.9));
    CHECK(cv >= 0.4);
    CHECK(cv <= 1.2);

    ATMap ab = at;
    augment_at(ab, AugmentParams{1.2, 0.0});
    augment_at(ab, AugmentParams{1.25, 0.0});
    ATMap once = at;
    augment_at(once, AugmentParams{1.5, 0.0});
    for (size_t i = 0; i < at.at.size(); ++i) CHECK(ab.at[i] == doctest::Approx(once.at[i]));

    CHECK_THROWS(augment_at(ab, AugmentParams{2.0, 0.0}));
}

TEST_CASE("ap template: rest, upstroke, plateau, return to rest") {
    APTemplate tpl;
    CHECK(tpl.value(-10.0) == doctest::Approx(-85.0));
    CHECK(tpl.value(0.0) == doctest::Approx(-85.0));
    CHECK(std::abs(tpl.value(5.0) - tpl.plateau_mv) < 2.0);
    CHECK(std::abs(tpl.value(tpl.apd90_ms + 100.0) - tpl.rest_mv) < 1.0);
    CHECK(std::abs(tpl.value(1e5) - tpl.rest_mv) < 1.0);
    // monotone upstroke
    double prev = tpl.value(0.0);
    for (double t = 0.1; t <= 4.0; t += 0.1) {
        const double v = tpl.value(t);
        CHECK(v >= prev - 1e-9);
        prev = v;
    }
    // 90% repolarized at apd90
    const double v90 = tpl.rest_mv + 0.1 * (tpl.plateau_mv - tpl.rest_mv);
    CHECK(std::abs(tpl.value(tpl.apd90_ms) - v90) < 6.0);
}

TEST_CASE("synthesize_tmv: shifts, rest columns, identical rows") {
    APTemplate tpl;
    const std::vector<double> at = {20.0, 20.0, 30.0};
    const TMVMatrix tmv = synthesize_tmv(at, tpl, 400);
    REQUIRE(tmv.rows() == 3);
    REQUIRE(tmv.cols() == 400);

    // identical ATs -> identical rows
    for (int k = 0; k < 400; ++k) CHECK(tmv(0, k) == tmv(1, k));

    // columns before min(AT) are at rest
    for (int k = 0; k < 20; ++k)
        for (int i = 0; i < 3; ++i) CHECK(tmv(i, k) == doctest::Approx(-85.0));

    // 10 ms shift property
    for (int k = 0; k < 390; ++k) CHECK(tmv(2, k + 10) == doctest::Approx(tmv(0, k)).epsilon(1e-6));
}
