#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>

#include "vloc/core/binio.hpp"
#include "vloc/pipe/predict.hpp"
#include "vloc/pipe/runner.hpp"

using namespace vloc;
namespace fs = std::filesystem;

namespace {

Config make_config(const std::string& config_path, uint64_t seed_override, bool seed_set,
                   int threads_override) {
    Config cfg = config_path.empty() ? Config{} : Config::load(config_path);
    if (seed_set) cfg.seed = seed_override;
    if (threads_override > 0) cfg.threads = threads_override;
    return cfg;
}

int run(int argc, char** argv) {
    CLI::App app{"BSPM simulation and ventricular excitation-origin localization"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path, out_dir, data_dir;
    uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads");

    auto* gen = app.add_subcommand("generate", "simulate the training corpus");

    auto* split = app.add_subcommand("split", "reassign the train/val/test split by heart");
    std::string split_data;
    double f_train = 0.7, f_val = 0.15, f_test = 0.15;
    split->add_option("--data", split_data, "dataset directory")->required();
    split->add_option("--train", f_train);
    split->add_option("--val", f_val);
    split->add_option("--test", f_test);

    auto* train_cmd = app.add_subcommand("train", "train one of the networks");
    std::string net_name, svd_basis_path, scalenet_path;
    train_cmd->add_option("--net", net_name, "scalenet | regnet | classnet")->required();
    train_cmd->add_option("--data", data_dir, "dataset directory")->required();
    train_cmd->add_option("--svd-basis", svd_basis_path, "filter crops with this basis");
    train_cmd->add_option("--scalenet", scalenet_path, "checkpoint for cropping (default <out>/scalenet)");

    auto* svd_cmd = app.add_subcommand("svd-basis", "compute the truncated basis from training crops");
    int rank = 32;
    std::string svd_data, svd_out, svd_scalenet;
    svd_cmd->add_option("--data", svd_data, "dataset directory")->required();
    svd_cmd->add_option("--rank", rank, "basis rank");
    svd_cmd->add_option("--scalenet", svd_scalenet, "scalenet checkpoint base");
    svd_cmd->add_option("--basis-out", svd_out, "output basename (default <out>/svd_basis)");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate trained localizers on the test split");
    std::string eval_models, eval_svd;
    eval_cmd->add_option("--data", data_dir, "dataset directory")->required();
    eval_cmd->add_option("--models", eval_models, "models directory")->required();
    eval_cmd->add_option("--svd-basis", eval_svd, "evaluate the svd-variant checkpoints");

    auto* base_cmd = app.add_subcommand("baseline", "random-origin baseline metrics");
    base_cmd->add_option("--data", data_dir, "dataset directory")->required();

    auto* pred_cmd = app.add_subcommand("predict", "localize one stored BSP image");
    std::string pred_models, pred_bspm, pred_heart, pred_truth;
    bool pred_svd = false;
    pred_cmd->add_option("--models", pred_models, "models directory")->required();
    pred_cmd->add_option("--bspm", pred_bspm, "BSP image file base")->required();
    pred_cmd->add_option("--truth-heart", pred_heart, "heart model base for error evaluation");
    pred_cmd->add_option("--truth-point", pred_truth, "x,y,z of the true origin (mm)");
    pred_cmd->add_flag("--svd", pred_svd, "use the svd-variant localizers");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help/usage
        return code == 0 ? 0 : 1;
    }
    const Config cfg = make_config(config_path, seed, seed_set, threads);

    if (gen->parsed()) {
        if (out_dir.empty()) throw std::runtime_error("generate: --out required");
        generate_dataset(cfg, out_dir);
        printf("dataset written to %s\n", out_dir.c_str());
        return 0;
    }
    if (split->parsed()) {
        const DatasetManifest man = load_manifest(split_data);
        save_split(split_data, split_by_heart(man.n_hearts, f_train, f_val, f_test, cfg.seed));
        printf("split reassigned\n");
        return 0;
    }
    if (train_cmd->parsed()) {
        const std::string models = out_dir.empty() ? data_dir + "/models" : out_dir;
        if (net_name == "scalenet") {
            train_scalenet(cfg, data_dir, models);
        } else if (net_name == "regnet" || net_name == "classnet") {
            const std::string sc = scalenet_path.empty() ? models + "/scalenet" : scalenet_path;
            const nn::Network<float> scalenet = nn::load_checkpoint(sc);
            std::optional<SvdBasis> basis;
            if (!svd_basis_path.empty()) basis = load_svd_basis(svd_basis_path);
            const auto kind =
                net_name == "regnet" ? nn::LossKind::RegNet : nn::LossKind::ClassNet;
            const std::string name = net_name + (basis ? "_svd" : "");
            train_localizer(cfg, data_dir, models, kind, scalenet, basis ? &*basis : nullptr, name);
        } else {
            throw CLI::ValidationError("--net", "unknown network: " + net_name);
        }
        return 0;
    }
    if (svd_cmd->parsed()) {
        const std::string models = out_dir.empty() ? svd_data + "/models" : out_dir;
        const std::string sc = svd_scalenet.empty() ? models + "/scalenet" : svd_scalenet;
        const nn::Network<float> scalenet = nn::load_checkpoint(sc);
        const SvdBasis basis = compute_svd_basis(cfg, svd_data, scalenet, rank);
        const std::string out = svd_out.empty() ? models + "/svd_basis" : svd_out;
        save_svd_basis(basis, out);
        printf("svd basis (rank %d) written to %s\n", rank, out.c_str());
        return 0;
    }
    if (eval_cmd->parsed()) {
        EvalContext ctx(data_dir);
        ctx.check_split_integrity();
        const nn::Network<float> scalenet = nn::load_checkpoint(eval_models + "/scalenet");
        const ScaleNetEval se = run_scalenet_eval(ctx, scalenet, 2, cfg.threads);
        printf("scalenet  start %.3f ms +- %.3f | end %.3f ms +- %.3f (n=%d)\n",
               se.start_median_ms, se.start_iqr_ms, se.end_median_ms, se.end_iqr_ms, se.n);
        std::optional<SvdBasis> basis;
        if (!eval_svd.empty()) basis = load_svd_basis(eval_svd);
        const std::string suffix = basis ? "_svd" : "";
        const nn::Network<float> regnet = nn::load_checkpoint(eval_models + "/regnet" + suffix);
        const nn::Network<float> classnet = nn::load_checkpoint(eval_models + "/classnet" + suffix);
        const MetricsReport r = run_localizer_eval(ctx, scalenet, regnet,
                                                   LocalizerMethod::Regression,
                                                   basis ? &*basis : nullptr, 2, cfg.threads);
        const MetricsReport c = run_localizer_eval(ctx, scalenet, classnet,
                                                   LocalizerMethod::Classification,
                                                   basis ? &*basis : nullptr, 2, cfg.threads);
        for (const auto& rep : {r, c}) {
            printf("%-12s median %.2f mm +- %.2f | m %.3f v %.3f (n=%d)\n", rep.method.c_str(),
                   rep.median_mm, rep.iqr_mm, rep.rate_m, rep.rate_v, rep.n);
            if (!rep.topk_median_mm.empty())
                printf("             top-1/2/3 %.2f / %.2f / %.2f mm\n", rep.topk_median_mm[0],
                       rep.topk_median_mm[1], rep.topk_median_mm[2]);
            if (!out_dir.empty()) {
                fs::create_directories(out_dir);
                write_text_file(out_dir + "/metrics_" + rep.method + ".json", rep.to_json());
            }
        }
        return 0;
    }
    if (base_cmd->parsed()) {
        EvalContext ctx(data_dir);
        const MetricsReport rep = random_baseline(ctx, cfg.seed, 2);
        printf("%-12s median %.2f mm +- %.2f | m %.3f v %.3f (n=%d)\n", rep.method.c_str(),
               rep.median_mm, rep.iqr_mm, rep.rate_m, rep.rate_v, rep.n);
        return 0;
    }
    if (pred_cmd->parsed()) {
        ModelBundle models = ModelBundle::load(pred_models, pred_svd);
        const BSPImage img = load_bsp_image(pred_bspm);
        std::optional<PredictTruth> truth;
        HeartModel truth_heart;
        if (!pred_heart.empty() && !pred_truth.empty()) {
            truth_heart = load_heart(pred_heart);
            PredictTruth t;
            double x, y, z;
            if (sscanf(pred_truth.c_str(), "%lf,%lf,%lf", &x, &y, &z) != 3)
                throw CLI::ValidationError("--truth-point", "expected x,y,z");
            t.point = Vec3(x, y, z);
            t.heart = &truth_heart;
            truth = t;
        }
        printf("%s\n", predict_json(models, img, truth).c_str());
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::Error&) {
        return 1;  // usage errors
    } catch (const std::exception& e) {
        fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
