#pragma once

// Analytic series for the surface potential of a current dipole inside a
// homogeneous conducting sphere. Test-side oracle, independent of the BEM
// implementation it checks.

#include <cmath>

#include "vloc/mesh/geom.hpp"

namespace vloc_test {

// Sphere of radius R (center origin), conductivity sigma, dipole at (0,0,b)
// with moment (pt, 0, pr): radial component pr along +z, tangential pt along
// +x. Evaluated at the surface point x (|x| == R).
inline double sphere_dipole_potential(const vloc::Vec3& x, double R, double sigma, double b,
                                      double pr, double pt, int n_terms = 80) {
    const double r = x.norm();
    const double ct = x.z() / r;                      // cos(theta)
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    const double cp = (st > 1e-12) ? x.x() / (r * st) : 0.0;  // cos(azimuth)

    // Legendre P_n and P_n^1 (without the Condon-Shortley phase).
    double p_prev = 1.0, p_cur = ct;                  // P_0, P_1
    double q_prev = 0.0, q_cur = st;                  // P_0^1, P_1^1
    double sum = 0.0;
    double b_pow = 1.0;                               // b^(n-1)
    double r_pow = 1.0 / (R * R);                     // 1/R^(n+1)
    for (int n = 1; n <= n_terms; ++n) {
        const double term =
            (2.0 * n + 1.0) / n * b_pow * r_pow * (n * pr * p_cur + pt * q_cur * cp);
        sum += term;
        // advance recurrences to n+1
        const double p_next = ((2.0 * n + 1.0) * ct * p_cur - n * p_prev) / (n + 1.0);
        const double q_next = ((2.0 * n + 1.0) * ct * q_cur - (n + 1.0) * q_prev) / n;
        p_prev = p_cur;
        p_cur = p_next;
        q_prev = q_cur;
        q_cur = q_next;
        b_pow *= b;
        r_pow /= R;
        if (std::abs(b_pow * r_pow) * R * R < 1e-18) break;
    }
    return sum / (4.0 * M_PI * sigma);
}

}  // namespace vloc_test
