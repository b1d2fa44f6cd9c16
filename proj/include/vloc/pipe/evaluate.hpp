#pragma once

#include "vloc/pipe/dataset.hpp"

namespace vloc {

double median_of(std::vector<double> v);
// (q1, q3) with linear interpolation between order statistics.
std::pair<double, double> quartiles_of(std::vector<double> v);

struct MetricsReport {
    std::string method;
    int n = 0;
    double median_mm = 0, iqr_mm = 0;
    double rate_m = 0, rate_v = 0;  // binary-coordinate correct rates
    std::vector<double> topk_median_mm, topk_iqr_mm;  // classification: k = 1..3

    std::string to_json() const;
};

struct ScaleNetEval {
    int n = 0;
    double start_median_ms = 0, start_iqr_ms = 0;
    double end_median_ms = 0, end_iqr_ms = 0;
};

enum class LocalizerMethod { Regression, Classification };

// Shared evaluation state for one dataset directory.
struct EvalContext {
    std::string dir;
    DatasetManifest man;
    CoarseMesh coarse;
    HeartCache hearts;

    explicit EvalContext(const std::string& d)
        : dir(d), man(load_manifest(d)), coarse(load_coarse_mesh(d + "/coarse")), hearts(d) {}

    // Asserts the heart-id split partition (leakage check).
    void check_split_integrity() const;
};

ScaleNetEval run_scalenet_eval(EvalContext& ctx, const nn::Network<float>& scalenet, int split,
                               int threads);

MetricsReport run_localizer_eval(EvalContext& ctx, const nn::Network<float>& scalenet,
                                 const nn::Network<float>& localizer, LocalizerMethod method,
                                 const SvdBasis* svd, int split, int threads);

// Uniform random surface origin per sample, same metric pipeline.
MetricsReport random_baseline(EvalContext& ctx, uint64_t seed, int split);

}  // namespace vloc
