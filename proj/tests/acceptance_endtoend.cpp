// Acceptance criteria 7 and 8: the desk-scale end-to-end experiment.
// Generates 50 hearts x 60 origins, trains the three networks (plus the two
// SVD-variant localizers), and checks the test-split metrics against the
// random baseline. Resumable: pass a run directory to keep artifacts.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>

#include "vloc/core/binio.hpp"
#include "vloc/pipe/predict.hpp"
#include "vloc/pipe/runner.hpp"

using namespace vloc;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(const char* criterion, bool pass, const std::string& detail) {
    printf("[%s] criterion %s (%s)\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    fflush(stdout);
    if (!pass) ++g_failures;
}

nn::Network<float> train_or_load(const std::string& base,
                                 const std::function<nn::Network<float>()>& trainer) {
    if (fs::exists(base + ".json")) {
        fprintf(stderr, "  reusing checkpoint %s\n", base.c_str());
        return nn::load_checkpoint(base);
    }
    return trainer();
}

}  // namespace

int main(int argc, char** argv) {
    const auto t0 = Clock::now();
    const std::string run_dir = argc > 1 ? argv[1] : "acceptance_run";
    const std::string data_dir = run_dir + "/dataset";
    const std::string models_dir = run_dir + "/models";
    fs::create_directories(run_dir);

    Config cfg;  // desk-scale defaults: 50 hearts x 60 origins
    if (argc > 2) cfg = Config::load(argv[2]);  // scaled-down pilot runs
    cfg.threads = 2;

    fprintf(stderr, "== generating the dataset (resumable) ==\n");
    generate_dataset(cfg, data_dir);

    fprintf(stderr, "== training scalenet ==\n");
    nn::Network<float> scalenet = train_or_load(
        models_dir + "/scalenet", [&] { return train_scalenet(cfg, data_dir, models_dir); });

    fprintf(stderr, "== training localizers ==\n");
    nn::Network<float> regnet =
        train_or_load(models_dir + "/regnet", [&] {
            return train_localizer(cfg, data_dir, models_dir, nn::LossKind::RegNet, scalenet,
                                   nullptr, "regnet");
        });
    nn::Network<float> classnet =
        train_or_load(models_dir + "/classnet", [&] {
            return train_localizer(cfg, data_dir, models_dir, nn::LossKind::ClassNet, scalenet,
                                   nullptr, "classnet");
        });

    fprintf(stderr, "== evaluating on the held-out test split ==\n");
    EvalContext ctx(data_dir);
    ctx.check_split_integrity();
    int test_hearts = 0;
    for (int s : ctx.man.split) test_hearts += s == 2;
    fprintf(stderr, "  test split: %d hearts, %zu samples\n", test_hearts,
            ctx.man.sample_ids_of_split(2).size());

    const MetricsReport base = random_baseline(ctx, cfg.seed ^ 0xba5e, 2);
    fprintf(stderr, "  baseline median %.2f mm (m %.3f, v %.3f)\n", base.median_mm, base.rate_m,
            base.rate_v);

    const ScaleNetEval se = run_scalenet_eval(ctx, scalenet, 2, cfg.threads);
    const MetricsReport reg = run_localizer_eval(ctx, scalenet, regnet,
                                                 LocalizerMethod::Regression, nullptr, 2,
                                                 cfg.threads);
    const MetricsReport cls = run_localizer_eval(ctx, scalenet, classnet,
                                                 LocalizerMethod::Classification, nullptr, 2,
                                                 cfg.threads);
    write_text_file(run_dir + "/metrics_baseline.json", base.to_json());
    write_text_file(run_dir + "/metrics_regnet.json", reg.to_json());
    write_text_file(run_dir + "/metrics_classnet.json", cls.to_json());

    {
        char detail[256];
        snprintf(detail, sizeof(detail),
                 "regnet %.2f mm, classnet %.2f mm vs 50%% of baseline %.2f mm",
                 reg.median_mm, cls.median_mm, base.median_mm);
        report("7a: localizer medians beat half the random baseline",
               reg.median_mm < 0.5 * base.median_mm && cls.median_mm < 0.5 * base.median_mm,
               detail);
    }
    {
        char detail[256];
        snprintf(detail, sizeof(detail),
                 "regnet m %.3f v %.3f, classnet m %.3f v %.3f (vs 0.9)", reg.rate_m, reg.rate_v,
                 cls.rate_m, cls.rate_v);
        report("7b: transmural and transventricular correct rates",
               reg.rate_m > 0.9 && reg.rate_v > 0.9 && cls.rate_m > 0.9 && cls.rate_v > 0.9,
               detail);
    }
    {
        char detail[256];
        snprintf(detail, sizeof(detail), "start %.3f ms, end %.3f ms (vs 5 ms)",
                 se.start_median_ms, se.end_median_ms);
        report("7c: scalenet median absolute boundary error",
               se.start_median_ms < 5.0 && se.end_median_ms < 5.0, detail);
    }

    fprintf(stderr, "== svd variant ==\n");
    SvdBasis basis;
    if (fs::exists(models_dir + "/svd_basis.json")) {
        basis = load_svd_basis(models_dir + "/svd_basis");
    } else {
        basis = compute_svd_basis(cfg, data_dir, scalenet, cfg.svd_rank);
        save_svd_basis(basis, models_dir + "/svd_basis");
    }
    {
        // svd_filter idempotence to 1e-6
        const auto ids = ctx.man.sample_ids_of_split(2);
        const BSPImage img = load_sample_image(data_dir, ctx.man.samples[static_cast<size_t>(ids[0])]);
        const BSPImage crop = crop_resample_localizer(img, 0.0, img.n_samples());
        const BSPImage once = svd_filter(crop, basis);
        const BSPImage twice = svd_filter(once, basis);
        const float drift = (twice.values - once.values).cwiseAbs().maxCoeff();
        char detail[128];
        snprintf(detail, sizeof(detail), "max drift %.2e vs 1e-6, rank %d", drift, basis.rank());
        report("8b: svd_filter idempotence", drift <= 1e-6f, detail);
    }

    nn::Network<float> regnet_svd =
        train_or_load(models_dir + "/regnet_svd", [&] {
            return train_localizer(cfg, data_dir, models_dir, nn::LossKind::RegNet, scalenet,
                                   &basis, "regnet_svd");
        });
    nn::Network<float> classnet_svd =
        train_or_load(models_dir + "/classnet_svd", [&] {
            return train_localizer(cfg, data_dir, models_dir, nn::LossKind::ClassNet, scalenet,
                                   &basis, "classnet_svd");
        });
    const MetricsReport reg_svd = run_localizer_eval(ctx, scalenet, regnet_svd,
                                                     LocalizerMethod::Regression, &basis, 2,
                                                     cfg.threads);
    const MetricsReport cls_svd = run_localizer_eval(ctx, scalenet, classnet_svd,
                                                     LocalizerMethod::Classification, &basis, 2,
                                                     cfg.threads);
    write_text_file(run_dir + "/metrics_regnet_svd.json", reg_svd.to_json());
    write_text_file(run_dir + "/metrics_classnet_svd.json", cls_svd.to_json());
    {
        char detail[256];
        snprintf(detail, sizeof(detail),
                 "regnet %.2f -> %.2f mm, classnet %.2f -> %.2f mm (allowed +50%%)",
                 reg.median_mm, reg_svd.median_mm, cls.median_mm, cls_svd.median_mm);
        report("8a: rank-32 filtering degrades medians by less than 50%",
               reg_svd.median_mm < 1.5 * reg.median_mm && cls_svd.median_mm < 1.5 * cls.median_mm,
               detail);
    }

    const double hours = std::chrono::duration<double>(Clock::now() - t0).count() / 3600.0;
    {
        char detail[64];
        snprintf(detail, sizeof(detail), "%.2f h vs 8 h", hours);
        report("7d: total runtime budget", hours < 8.0, detail);
    }

    if (g_failures > 0) {
        printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    printf("all end-to-end acceptance criteria passed\n");
    return 0;
}
