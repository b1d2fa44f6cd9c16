#pragma once

#include "vloc/fwd/bem.hpp"
#include "vloc/fwd/electrodes.hpp"
#include "vloc/sig/butterworth.hpp"

namespace vloc {

// Grid-arranged body-surface potentials: 224 rows (8x28 slots, row-major) by
// T time samples.
struct BSPImage {
    Eigen::MatrixXf values;  // 224 x T
    double sample_rate_hz = 1000.0;
    bool filtered = false;
    bool normalized = false;
    bool svd_filtered = false;

    int n_samples() const { return static_cast<int>(values.cols()); }
};

// Per-channel division by the max absolute value over time; all-zero
// channels stay zero.
BSPMatrix normalize_maxabs(const BSPMatrix& bsp);

// Bandpass every channel (causal biquad cascade).
BSPMatrix bandpass(const BSPMatrix& bsp, const FilterSpec& spec);

// Places the 200 electrode channels at their grid slots and fills the 24
// armpit slots by Laplacian interpolation on the 8x28 grid with horizontal
// wrap-around adjacency.
BSPImage arrange_grid(const BSPMatrix& bsp, const ElectrodeLayout& layout);

// Pads to 700 samples by repeating the last column, then decimates by 2
// (1 kHz -> 500 Hz): 224 x 350. Throws "signal-too-long" past 700 samples.
BSPImage pad_resample_scalenet(const BSPImage& img);

// Crops [start,end) ms (clamped into range) and linearly resamples the crop
// to exactly 125 samples: 224 x 125. Throws "empty-crop" when the clamped
// window vanishes.
BSPImage crop_resample_localizer(const BSPImage& img, double start_ms, double end_ms);

}  // namespace vloc
