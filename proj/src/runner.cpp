#include "vloc/pipe/runner.hpp"

#include <cstdio>
#include <filesystem>

#include "vloc/core/parallel.hpp"

namespace vloc {

namespace {

// Range test on a throwaway copy of the net, then train with the found span.
void pick_learning_rates(const Config& cfg, nn::Network<float>& scratch, nn::LossKind kind,
                         const nn::SampleSet& train_set, nn::TrainConfig& tc) {
    if (!cfg.auto_lr) return;
    try {
        nn::Adam<float> opt(scratch.bank());
        nn::ParamBank<float> grads = scratch.bank().zeros_like();
        std::vector<int> order(static_cast<size_t>(train_set.n));
        for (int i = 0; i < train_set.n; ++i) order[static_cast<size_t>(i)] = i;
        Rng rng(cfg.seed, 0x1a7e);
        long cursor = 0;
        auto step = [&](double lr) {
            const int count = std::min(cfg.train.batch, train_set.n);
            nn::Tensor4<float> x, y, pred, grad_out;
            x.resize(count, 1, train_set.rows, train_set.cols);
            y.resize(count, train_set.label_dim, 1, 1);
            for (int i = 0; i < count; ++i) {
                const int s = order[static_cast<size_t>((cursor + i) % train_set.n)];
                std::copy_n(train_set.image(s), static_cast<size_t>(train_set.rows) * train_set.cols,
                            x.sample(i));
                std::copy_n(train_set.label(s), static_cast<size_t>(train_set.label_dim), y.sample(i));
            }
            cursor += count;
            typename nn::Network<float>::Ctx ctx;
            scratch.forward(x, pred, ctx, true, rng);
            const double loss = nn::loss_value(kind, pred, y, &grad_out);
            grads.set_zero();
            scratch.backward(grad_out, ctx, grads);
            opt.step(scratch.bank(), grads, lr);
            return loss;
        };
        const auto res = nn::lr_range_test(step, 1e-6, 0.5, 60);
        // clamp into a sane span; the knee detector can run hot on noisy curves
        tc.lr_max = std::clamp(res.lr_max, 1e-5, 5e-3);
        tc.lr_min = tc.lr_max / 10.0;
        fprintf(stderr, "  lr range test: lr_max %.3g (%s)\n", tc.lr_max,
                res.degenerate ? "degenerate curve, widest range" : "knee");
    } catch (const std::exception& e) {
        fprintf(stderr, "  lr range test failed (%s); using fallback %.3g\n", e.what(),
                cfg.fallback_lr_max);
        tc.lr_max = cfg.fallback_lr_max;
        tc.lr_min = tc.lr_max / 10.0;
    }
}

nn::Network<float> run_training(const Config& cfg, nn::NetworkSpec spec, nn::LossKind kind,
                                const nn::SampleSet& train_set, const nn::SampleSet& val_set,
                                const std::string& out_dir, const std::string& name) {
    std::filesystem::create_directories(out_dir);
    nn::Network<float> net(spec);
    nn::TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    tc.threads = cfg.threads;
    {
        nn::Network<float> scratch(spec);
        pick_learning_rates(cfg, scratch, kind, train_set, tc);
    }
    const nn::TrainResult result = nn::train(net, kind, train_set, val_set, tc);
    fprintf(stderr, "  %s: stopped at epoch %d, best epoch %d (val loss %.5g)\n", name.c_str(),
            result.stopped_epoch, result.best_epoch, result.best_val);
    nn::save_checkpoint(net, out_dir + "/" + name, result.best_epoch, result.best_val, cfg.seed);
    nn::write_history_csv(result.history, out_dir + "/" + name + "_history.csv");
    return net;
}

}  // namespace

nn::Network<float> train_scalenet(const Config& cfg, const std::string& data_dir,
                                  const std::string& out_dir) {
    const DatasetManifest man = load_manifest(data_dir);
    const nn::SampleSet train_set =
        build_scalenet_set(data_dir, man, man.sample_ids_of_split(0), cfg.threads);
    const nn::SampleSet val_set =
        build_scalenet_set(data_dir, man, man.sample_ids_of_split(1), cfg.threads);
    nn::NetworkSpec spec = cfg.net;
    spec.in_h = 224;
    spec.in_w = 350;
    spec.outputs = 2;
    spec.init_seed = cfg.seed ^ 0x5ca1e;
    return run_training(cfg, spec, nn::LossKind::ScaleNet, train_set, val_set, out_dir, "scalenet");
}

nn::Network<float> train_localizer(const Config& cfg, const std::string& data_dir,
                                   const std::string& out_dir, nn::LossKind kind,
                                   const nn::Network<float>& scalenet, const SvdBasis* svd,
                                   const std::string& name) {
    const DatasetManifest man = load_manifest(data_dir);
    const CoarseMesh coarse = load_coarse_mesh(data_dir + "/coarse");
    const nn::SampleSet train_set = build_localizer_set(
        data_dir, man, man.sample_ids_of_split(0), scalenet, kind, coarse, svd, cfg.threads);
    const nn::SampleSet val_set = build_localizer_set(
        data_dir, man, man.sample_ids_of_split(1), scalenet, kind, coarse, svd, cfg.threads);
    nn::NetworkSpec spec = cfg.net;
    spec.in_h = 224;
    spec.in_w = 125;
    spec.outputs = kind == nn::LossKind::RegNet ? 5 : coarse.n_classes();
    spec.init_seed = cfg.seed ^ (kind == nn::LossKind::RegNet ? 0x4e9 : 0xc1a55);
    return run_training(cfg, spec, kind, train_set, val_set, out_dir, name);
}

SvdBasis compute_svd_basis(const Config& cfg, const std::string& data_dir,
                           const nn::Network<float>& scalenet, int rank) {
    const DatasetManifest man = load_manifest(data_dir);
    const CoarseMesh coarse = load_coarse_mesh(data_dir + "/coarse");
    // RegNet label layout is irrelevant here; only the crops are used.
    const nn::SampleSet train_set =
        build_localizer_set(data_dir, man, man.sample_ids_of_split(0), scalenet,
                            nn::LossKind::RegNet, coarse, nullptr, cfg.threads);
    SvdAccumulator acc(cfg.svd_axis == "spatial" ? SvdAxis::Spatial : SvdAxis::Temporal);
    for (int i = 0; i < train_set.n; ++i) {
        BSPImage img;
        img.values = Eigen::Map<const Eigen::MatrixXf>(train_set.image(i), 224, 125);
        acc.add(img);
    }
    return acc.finalize(rank);
}

}  // namespace vloc
