#pragma once

#include <cmath>

namespace vloc {

// Analytic ventricular action-potential template: rest, logistic upstroke,
// plateau with slow linear decay, logistic repolarization. Continuous, once
// differentiable except at t = 0.
struct APTemplate {
    double rest_mv = -85.0;
    double plateau_mv = 25.0;
    double upstroke_tau_ms = 0.5;
    double apd90_ms = 280.0;
    double repol_tau_ms = 15.0;      // repolarization shape constant
    double plateau_decay = 4e-4;     // relative amplitude loss per ms

    // t is relative to the local activation time.
    double value(double t) const {
        if (t <= 0.0) return rest_mv;
        const double amplitude = plateau_mv - rest_mv;
        // Upstroke normalized so u(0) = 0 exactly.
        const double center = 4.0 * upstroke_tau_ms;
        const double s0 = 1.0 / (1.0 + std::exp(center / upstroke_tau_ms));
        const double s = 1.0 / (1.0 + std::exp(-(t - center) / upstroke_tau_ms));
        const double u = (s - s0) / (1.0 - s0);
        // Repolarization reaches 90% at apd90.
        const double t_r = apd90_ms - repol_tau_ms * 2.19722457733621938;  // ln 9
        const double r = 1.0 - 1.0 / (1.0 + std::exp(-(t - t_r) / repol_tau_ms));
        const double d = std::max(0.0, 1.0 - plateau_decay * t);
        return rest_mv + amplitude * u * d * r;
    }
};

}  // namespace vloc
