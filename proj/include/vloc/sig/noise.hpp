#pragma once

#include <cstdint>
#include <limits>

#include "vloc/fwd/bem.hpp"

namespace vloc {

// SNRs are defined against the mean signal power over all electrodes within
// the activation window. An infinite SNR disables that component.
struct NoiseSpec {
    double snr_wgn_db = 30.0;
    double snr_emg_db = 30.0;
    double snr_drift_db = 10.0;
    int window_start_ms = 0;
    int window_end_ms = 0;
    uint64_t seed = 0;

    static constexpr double kDisabled = std::numeric_limits<double>::infinity();
    void validate(int n_samples) const;
};

// Adds white Gaussian noise, a synthetic EMG surrogate (white noise
// bandpassed 20-150 Hz) and a synthetic baseline-drift surrogate
// (random-phase sinusoids below 0.8 Hz, shared waveform with a random gain
// per channel). Each component is scaled so its measured power matches the
// requested SNR. Deterministic per seed.
BSPMatrix add_noise(const BSPMatrix& bsp, const NoiseSpec& spec);

}  // namespace vloc
