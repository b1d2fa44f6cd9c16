#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "analytic_sphere.hpp"
#include "vloc/core/rng.hpp"
#include "vloc/fwd/bem.hpp"
#include "vloc/fwd/electrodes.hpp"
#include "vloc/heart/torso.hpp"

using namespace vloc;

namespace {

double rel_rms_mean_free(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd da = a.array() - a.mean();
    const Eigen::VectorXd db = b.array() - b.mean();
    return (da - db).norm() / db.norm();
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    auto ranks = [&](const std::vector<double>& v) {
        std::vector<size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("solid angle: closed surface totals 4pi inside, 0 outside") {
    const TriMesh sphere = make_icosphere(Vec3(0, 0, 0), 10.0, 1);
    std::vector<double> w(static_cast<size_t>(sphere.n_vertices()), 0.0);
    accumulate_solid_angle_weights(sphere, Vec3(1.0, -2.0, 0.5), w.data());
    const double inside = std::accumulate(w.begin(), w.end(), 0.0);
    CHECK(inside == doctest::Approx(4.0 * M_PI).epsilon(1e-6));

    std::fill(w.begin(), w.end(), 0.0);
    accumulate_solid_angle_weights(sphere, Vec3(25.0, 3.0, -4.0), w.data());
    const double outside = std::accumulate(w.begin(), w.end(), 0.0);
    CHECK(std::abs(outside) < 1e-8);
}

TEST_CASE("bem: dipole in a homogeneous sphere matches the analytic series") {
    const double R = 100.0, sigma = 0.2;
    Compartment sphere;
    sphere.surface = make_icosphere(Vec3(0, 0, 0), R, 3);  // 1280 triangles
    sphere.sigma_inside = sigma;
    sphere.sigma_outside = 0.0;
    BemSolver bem({sphere});
    bem.factorize();

    auto check_case = [&](double b, double pr, double pt) {
        const Eigen::VectorXd rhs = bem.dipole_rhs(Vec3(0, 0, b), Vec3(pt, 0, pr));
        const Eigen::VectorXd phi = bem.solve(rhs);
        Eigen::VectorXd ref(bem.n_nodes());
        for (int i = 0; i < bem.n_nodes(); ++i)
            ref[i] = vloc_test::sphere_dipole_potential(sphere.surface.vertices[static_cast<size_t>(i)],
                                                        R, sigma, b, pr, pt);
        return rel_rms_mean_free(phi, ref);
    };

    CHECK(check_case(0.0, 1.0, 0.0) < 0.05);   // centered radial
    CHECK(check_case(40.0, 1.0, 0.0) < 0.05);  // offset radial
    CHECK(check_case(40.0, 0.0, 1.0) < 0.05);  // offset tangential

    // Centered dipole also against the closed form 3 p cos(theta) / 4 pi s R^2.
    const Eigen::VectorXd phi = bem.solve(bem.dipole_rhs(Vec3(0, 0, 0), Vec3(0, 0, 1)));
    Eigen::VectorXd ref(bem.n_nodes());
    for (int i = 0; i < bem.n_nodes(); ++i) {
        const Vec3& v = sphere.surface.vertices[static_cast<size_t>(i)];
        ref[i] = 3.0 * v.z() / v.norm() / (4.0 * M_PI * sigma * R * R);
    }
    CHECK(rel_rms_mean_free(phi, ref) < 0.05);
}

TEST_CASE("bem: deflation vector choice shifts the solution by a constant") {
    Compartment sphere;
    sphere.surface = make_icosphere(Vec3(0, 0, 0), 50.0, 2);
    sphere.sigma_inside = 0.2;
    BemSolver a({sphere}), b({sphere});
    a.factorize(0);
    b.factorize(1);
    const Eigen::VectorXd rhs = a.dipole_rhs(Vec3(0, 0, 10), Vec3(1, 0, 1));
    const Eigen::VectorXd pa = a.solve(rhs), pb = b.solve(rhs);
    const Eigen::VectorXd diff = pa - pb;
    const double mean = diff.mean();
    CHECK((diff.array() - mean).abs().maxCoeff() < 1e-8 * pa.norm());
}

TEST_CASE("bem: uniform source is silent, transfer is linear, entries decay") {
    // Torso with a spherical "heart" source inside.
    const TorsoModel torso = make_reference_torso(24, 18);
    const ElectrodeLayout layout = build_electrode_layout(torso);
    const Vec3 heart_c(0, 10, torso.heart_z_frac * torso.height);
    const TriMesh heart = make_icosphere(heart_c, 30.0, 2);

    Compartment outer;
    outer.surface = torso.surface;
    outer.sigma_inside = 0.2;
    BemSolver bem({outer});
    bem.factorize();
    const Eigen::MatrixXd B = bem.source_matrix(heart, 0.05);
    const Eigen::MatrixXd A = bem.transfer(layout.bary, B);
    REQUIRE(A.rows() == 200);
    REQUIRE(A.cols() == heart.n_vertices());

    // Uniform Vm across the closed surface produces no external field.
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(heart.n_vertices());
    Eigen::VectorXd phi_u = A * ones;
    // scale of a genuinely dipolar pattern for comparison
    Eigen::VectorXd vm_dip(heart.n_vertices());
    for (int j = 0; j < heart.n_vertices(); ++j)
        vm_dip[j] = heart.vertices[static_cast<size_t>(j)].z() - heart_c.z() > 0 ? 1.0 : -1.0;
    const double dip_scale = (A * vm_dip).cwiseAbs().maxCoeff();
    CHECK(phi_u.cwiseAbs().maxCoeff() < 1e-6 * dip_scale);

    // Linearity: scaling and negation are exact.
    const Eigen::MatrixXf Af = A.cast<float>();
    Eigen::MatrixXf tmv(heart.n_vertices(), 3);
    Rng rng(4);
    for (int i = 0; i < tmv.rows(); ++i)
        for (int k = 0; k < 3; ++k) tmv(i, k) = static_cast<float>(rng.uniform(-80, 20));
    const BSPMatrix bsp = forward_bsp(Af, tmv);
    const BSPMatrix bsp2 = forward_bsp(Af, Eigen::MatrixXf(2.0f * tmv));
    const BSPMatrix bspn = forward_bsp(Af, Eigen::MatrixXf(-tmv));
    CHECK((bsp2 - 2.0f * bsp).cwiseAbs().maxCoeff() == 0.0f);
    CHECK((bspn + bsp).cwiseAbs().maxCoeff() == 0.0f);

}

TEST_CASE("bem: transfer entries decay with source-to-electrode distance") {
    // Offset spheres give a wide distance contrast (45..255 mm), where the
    // kernel decay dominates the volume-conductor smoothing.
    Compartment outer;
    outer.surface = make_icosphere(Vec3(0, 0, 0), 150.0, 2);
    outer.sigma_inside = 0.2;
    const TriMesh heart = make_icosphere(Vec3(0, 80, 0), 25.0, 2);
    BemSolver bem({outer});
    bem.factorize();
    const Eigen::MatrixXd B = bem.source_matrix(heart, 0.05);
    std::vector<BaryPoint> electrodes;
    std::vector<Vec3> epos;
    for (int v = 0; v < outer.surface.n_vertices(); v += 2) {
        electrodes.push_back(nearest_surface_point(outer.surface, outer.surface.vertices[static_cast<size_t>(v)]));
        epos.push_back(outer.surface.vertices[static_cast<size_t>(v)]);
    }
    const Eigen::MatrixXd A = bem.transfer(electrodes, B);
    std::vector<double> mag, dist;
    for (size_t e = 0; e < electrodes.size(); ++e) {
        for (int j = 0; j < heart.n_vertices(); ++j) {
            mag.push_back(std::abs(A(static_cast<int>(e), j)));
            dist.push_back((epos[e] - heart.vertices[static_cast<size_t>(j)]).norm());
        }
    }
    CHECK(spearman(mag, dist) < -0.5);
}

TEST_CASE("forward_bsp: zeros and shape mismatch") {
    Eigen::MatrixXf A = Eigen::MatrixXf::Random(4, 6);
    const BSPMatrix z = forward_bsp(A, Eigen::MatrixXf::Zero(6, 10));
    CHECK(z.cwiseAbs().maxCoeff() == 0.0f);
    CHECK_THROWS(forward_bsp(A, Eigen::MatrixXf::Zero(5, 10)));
}

TEST_CASE("electrode layout: 8x28 grid, 200 present, armpits masked") {
    const TorsoModel torso = make_reference_torso();
    const ElectrodeLayout layout = build_electrode_layout(torso);
    layout.validate();
    CHECK(layout.n_electrodes() == 200);
    int missing = 0;
    for (int s = 0; s < ElectrodeLayout::kSlots; ++s) missing += !layout.present[static_cast<size_t>(s)];
    CHECK(missing == 24);
    // every electrode lies on the torso surface
    for (int e = 0; e < 200; ++e) {
        const auto bp = nearest_surface_point(torso.surface, layout.positions[static_cast<size_t>(e)]);
        CHECK((bp.point(torso.surface) - layout.positions[static_cast<size_t>(e)]).norm() < 1e-9);
    }
}

TEST_CASE("electrode projection: identity, uniform scaling, completeness") {
    const TorsoModel torso = make_reference_torso();
    const ElectrodeLayout layout = build_electrode_layout(torso);

    SUBCASE("patient == reference leaves the layout unchanged") {
        const ElectrodeLayout proj = project_electrodes(torso, layout, torso.surface);
        for (int e = 0; e < 200; ++e)
            CHECK((proj.positions[static_cast<size_t>(e)] - layout.positions[static_cast<size_t>(e)]).norm() <
                  1e-6);
    }

    SUBCASE("uniformly scaled patient keeps electrodes on the projection rays") {
        TriMesh scaled = torso.surface;
        const Vec3 c = torso.centroid();
        for (auto& v : scaled.vertices) v = c + 1.1 * (v - c);
        scaled.update_areas();
        const ElectrodeLayout proj = project_electrodes(torso, layout, scaled);
        for (int e = 0; e < 200; ++e) {
            const Vec3 pos = layout.positions[static_cast<size_t>(e)];
            const Vec3 inner =
                c + Vec3(0.7 * (pos.x() - c.x()), 0.5 * (pos.y() - c.y()), pos.z() - c.z());
            const Vec3 dir = (pos - inner).normalized();
            const Vec3 d = proj.positions[static_cast<size_t>(e)] - inner;
            // collinearity with the projection ray
            CHECK(d.cross(dir).norm() / d.norm() < 1e-6);
            // lands on the scaled surface
            const auto bp = nearest_surface_point(scaled, proj.positions[static_cast<size_t>(e)]);
            CHECK((bp.point(scaled) - proj.positions[static_cast<size_t>(e)]).norm() < 1e-7);
        }
    }
}
