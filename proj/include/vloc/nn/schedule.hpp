#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace vloc::nn {

// Triangular cyclical learning rate: hits lr_min at the start and lr_max at
// the midpoint of every cycle, each exactly once per cycle.
struct CyclicalLR {
    double lr_min = 1e-4, lr_max = 1e-3;
    long cycle_iters = 1000;

    double at(long iter) const {
        const double phase = static_cast<double>(iter % cycle_iters) / cycle_iters;
        return lr_min + (lr_max - lr_min) * (1.0 - std::abs(2.0 * phase - 1.0));
    }
};

struct RangeTestResult {
    double lr_min = 0, lr_max = 0;
    bool degenerate = false;  // flat curve: widest stable range returned
    std::vector<std::pair<double, double>> curve;  // (log10 lr, smoothed loss)
};

// Learning-rate range test: one geometric sweep, polynomial fit of the loss
// over log-lr, knee at the point of maximum curvature before divergence;
// lr_min = lr_max / 10. `step_at` applies one update at the given rate and
// returns the resulting loss.
RangeTestResult lr_range_test(const std::function<double(double)>& step_at, double lr_lo,
                              double lr_hi, int n_steps);

}  // namespace vloc::nn
