#include "vloc/sig/noise.hpp"

#include <cmath>
#include <stdexcept>

#include "vloc/core/rng.hpp"
#include "vloc/sig/butterworth.hpp"

namespace vloc {

namespace {

double window_power(const BSPMatrix& x, int lo, int hi) {
    double p = 0.0;
    long n = 0;
    for (int c = lo; c < hi; ++c) {
        for (int r = 0; r < x.rows(); ++r) {
            p += static_cast<double>(x(r, c)) * x(r, c);
            ++n;
        }
    }
    return n > 0 ? p / static_cast<double>(n) : 0.0;
}

void add_scaled(BSPMatrix& acc, const BSPMatrix& noise, double target_power, int lo, int hi) {
    const double measured = window_power(noise, lo, hi);
    if (measured <= 0.0) return;
    const float scale = static_cast<float>(std::sqrt(target_power / measured));
    acc += scale * noise;
}

}  // namespace

void NoiseSpec::validate(int n_samples) const {
    if (window_start_ms < 0 || window_end_ms > n_samples || window_start_ms >= window_end_ms)
        throw std::runtime_error("noise: invalid activation window");
}

BSPMatrix add_noise(const BSPMatrix& bsp, const NoiseSpec& spec) {
    spec.validate(static_cast<int>(bsp.cols()));
    const int ne = static_cast<int>(bsp.rows());
    const int nt = static_cast<int>(bsp.cols());
    const int lo = spec.window_start_ms, hi = spec.window_end_ms;

    const double p_sig = window_power(bsp, lo, hi);
    if (p_sig <= 0.0) throw std::runtime_error("zero-signal");

    BSPMatrix out = bsp;
    auto target = [&](double snr_db) { return p_sig * std::pow(10.0, -snr_db / 10.0); };

    if (std::isfinite(spec.snr_wgn_db)) {
        Rng rng(spec.seed, 0x3101);
        BSPMatrix wgn(ne, nt);
        for (int r = 0; r < ne; ++r)
            for (int c = 0; c < nt; ++c) wgn(r, c) = static_cast<float>(rng.normal());
        add_scaled(out, wgn, target(spec.snr_wgn_db), lo, hi);
    }

    if (std::isfinite(spec.snr_emg_db)) {
        Rng rng(spec.seed, 0x3102);
        BSPMatrix emg(ne, nt);
        for (int r = 0; r < ne; ++r)
            for (int c = 0; c < nt; ++c) emg(r, c) = static_cast<float>(rng.normal());
        FilterSpec fs;
        fs.low_hz = 20.0;
        fs.high_hz = 150.0;
        fs.sample_rate_hz = 1000.0;
        const ButterworthBandpass bp(fs);
        std::vector<float> row(static_cast<size_t>(nt));
        for (int r = 0; r < ne; ++r) {
            for (int c = 0; c < nt; ++c) row[static_cast<size_t>(c)] = emg(r, c);
            bp.process_inplace(row.data(), nt);
            for (int c = 0; c < nt; ++c) emg(r, c) = row[static_cast<size_t>(c)];
        }
        add_scaled(out, emg, target(spec.snr_emg_db), lo, hi);
    }

    if (std::isfinite(spec.snr_drift_db)) {
        Rng rng(spec.seed, 0x3103);
        // Shared low-frequency waveform, random gain per channel.
        constexpr int kTones = 8;
        double freq[kTones], phase[kTones];
        for (int k = 0; k < kTones; ++k) {
            // Baseline wander concentrates well below the 0.5 Hz filter edge;
            // the cubic warp puts most tones there (median ~0.14 Hz).
            const double u = rng.uniform();
            freq[k] = 0.05 + 0.75 * u * u * u;
            phase[k] = rng.uniform(0.0, 2.0 * M_PI);
        }
        std::vector<double> wave(static_cast<size_t>(nt), 0.0);
        for (int c = 0; c < nt; ++c)
            for (int k = 0; k < kTones; ++k)
                wave[static_cast<size_t>(c)] += std::sin(2.0 * M_PI * freq[k] * c / 1000.0 + phase[k]);
        BSPMatrix drift(ne, nt);
        for (int r = 0; r < ne; ++r) {
            const double gain = rng.uniform(0.5, 1.5);
            for (int c = 0; c < nt; ++c)
                drift(r, c) = static_cast<float>(gain * wave[static_cast<size_t>(c)]);
        }
        add_scaled(out, drift, target(spec.snr_drift_db), lo, hi);
    }

    return out;
}

}  // namespace vloc
