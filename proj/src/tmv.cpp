#include "vloc/eik/tmv.hpp"

#include <cmath>
#include <stdexcept>

namespace vloc {

TMVMatrix synthesize_tmv(const std::vector<double>& at, const APTemplate& tpl, int duration_ms) {
    if (at.empty() || duration_ms < 1) throw std::runtime_error("synthesize_tmv: empty input");
    const int n = static_cast<int>(at.size());
    TMVMatrix out(n, duration_ms);

    // Template lookup at 0.1 ms steps; integral-ms shifts stay exact shifts.
    const double dt = 0.1;
    double max_at = 0.0;
    for (double a : at) max_at = std::max(max_at, a);
    const int table_n = static_cast<int>((duration_ms + max_at) / dt) + 4;
    std::vector<float> table(static_cast<size_t>(table_n));
    for (int i = 0; i < table_n; ++i) table[static_cast<size_t>(i)] = static_cast<float>(tpl.value(i * dt));

    for (int i = 0; i < n; ++i) {
        const double a = at[static_cast<size_t>(i)];
        for (int k = 0; k < duration_ms; ++k) {
            const double t = k * 1.0 - a;
            if (t <= 0.0) {
                out(i, k) = static_cast<float>(tpl.rest_mv);
                continue;
            }
            const double x = t / dt;
            const int j = std::min(static_cast<int>(x), table_n - 2);
            const double w = x - j;
            out(i, k) = static_cast<float>((1.0 - w) * table[static_cast<size_t>(j)] +
                                           w * table[static_cast<size_t>(j) + 1]);
        }
    }
    return out;
}

}  // namespace vloc
