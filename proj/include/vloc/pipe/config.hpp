#pragma once

#include <string>

#include "vloc/eik/ap_template.hpp"
#include "vloc/eik/eikonal.hpp"
#include "vloc/nn/network.hpp"
#include "vloc/nn/train.hpp"
#include "vloc/sig/butterworth.hpp"
#include "vloc/sig/noise.hpp"

namespace vloc {

// Desk-scale defaults; every field can be overridden from a JSON config.
struct Config {
    int format_version = 1;
    uint64_t seed = 1;
    int threads = 2;

    // dataset plan
    int n_hearts = 50;
    int placements_per_heart = 1;
    int origins_per_heart = 60;
    double split_train = 0.70, split_val = 0.15, split_test = 0.15;

    // geometry
    double mesh_resolution = 2.0;        // heart volume lattice, mm
    double cavity_resolution = 4.0;
    double cavity_erosion = 1.2;
    double rv_wall = 3.0;                // mm
    int coarse_triangles = 240;

    // electrophysiology
    ConductionParams conduction;
    APTemplate ap;
    double aug_scale_lo = 0.5, aug_scale_hi = 1.5;
    double aug_shift_lo = 0.0, aug_shift_hi = 100.0;
    double truncation_lo = 0.0, truncation_hi = 100.0;  // ms past activation end

    // torso conductivities (S/m)
    double sigma_torso = 0.2, sigma_blood = 0.6;
    double sigma_intra = 0.05, sigma_extra = 0.15;

    // signal processing
    double snr_wgn_db = 30.0, snr_emg_db = 30.0, snr_drift_db = 10.0;
    FilterSpec filter;

    // networks / training
    nn::NetworkSpec net;       // head/in_w adjusted per task at build time
    nn::TrainConfig train = [] {
        nn::TrainConfig t;
        t.max_epochs = 40;
        return t;
    }();
    bool auto_lr = true;       // range test before each training
    double fallback_lr_max = 2e-3;

    // svd variant
    int svd_rank = 32;
    std::string svd_axis = "spatial";

    uint64_t content_hash() const;
    static Config load(const std::string& path);            // JSON file
    static Config from_json_text(const std::string& text);  // overrides on defaults
    std::string to_json() const;
};

}  // namespace vloc
