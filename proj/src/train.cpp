#include "vloc/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "vloc/core/binio.hpp"
#include "vloc/core/parallel.hpp"

namespace vloc::nn {

using nlohmann::json;

RangeTestResult lr_range_test(const std::function<double(double)>& step_at, double lr_lo,
                              double lr_hi, int n_steps) {
    if (n_steps < 50) throw std::runtime_error("lr_range_test: need at least 50 steps");
    if (!(0 < lr_lo && lr_lo < lr_hi)) throw std::runtime_error("lr_range_test: bad span");

    std::vector<double> xs, ys;
    double min_loss = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_steps; ++i) {
        const double lr = lr_lo * std::pow(lr_hi / lr_lo, static_cast<double>(i) / (n_steps - 1));
        const double loss = step_at(lr);
        if (!std::isfinite(loss) || (xs.size() > 5 && loss > 4.0 * min_loss)) break;  // diverged
        xs.push_back(std::log10(lr));
        ys.push_back(loss);
        min_loss = std::min(min_loss, loss);
    }
    if (xs.size() < 8) throw std::runtime_error("range-test-failed");

    // Moving-average smoothing.
    RangeTestResult out;
    std::vector<double> smooth(ys.size());
    for (size_t i = 0; i < ys.size(); ++i) {
        double acc = 0;
        int cnt = 0;
        for (int d = -2; d <= 2; ++d) {
            const long j = static_cast<long>(i) + d;
            if (j >= 0 && j < static_cast<long>(ys.size())) {
                acc += ys[static_cast<size_t>(j)];
                ++cnt;
            }
        }
        smooth[i] = acc / cnt;
        out.curve.emplace_back(xs[i], smooth[i]);
    }

    // Degree-4 least-squares fit over x scaled to [-1,1].
    const double x0 = xs.front(), x1 = xs.back();
    auto scale = [&](double x) { return 2.0 * (x - x0) / (x1 - x0) - 1.0; };
    Eigen::MatrixXd A(static_cast<long>(xs.size()), 5);
    Eigen::VectorXd b(static_cast<long>(xs.size()));
    for (size_t i = 0; i < xs.size(); ++i) {
        const double t = scale(xs[i]);
        double p = 1;
        for (int d = 0; d <= 4; ++d) {
            A(static_cast<long>(i), d) = p;
            p *= t;
        }
        b[static_cast<long>(i)] = smooth[i];
    }
    const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);

    auto poly = [&](double t) { return c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * c[4]))); };
    auto dpoly = [&](double t) { return c[1] + t * (2 * c[2] + t * (3 * c[3] + t * 4 * c[4])); };
    auto ddpoly = [&](double t) { return 2 * c[2] + t * (6 * c[3] + t * 12 * c[4]); };

    const double spread = *std::max_element(smooth.begin(), smooth.end()) -
                          *std::min_element(smooth.begin(), smooth.end());
    if (spread < 1e-12 * std::max(1.0, std::abs(smooth.front()))) {
        out.degenerate = true;  // flat curve: return the widest stable range
        out.lr_max = std::pow(10.0, xs.back());
        out.lr_min = out.lr_max / 10.0;
        return out;
    }

    // Knee: maximum curvature on the rising side past the fitted minimum.
    double t_min = -1.0, v_min = poly(-1.0);
    for (double t = -1.0; t <= 1.0; t += 1e-3) {
        if (poly(t) < v_min) {
            v_min = poly(t);
            t_min = t;
        }
    }
    double best_t = 1.0, best_kappa = -1.0;
    for (double t = t_min; t <= 1.0; t += 1e-3) {
        const double dd = ddpoly(t);
        if (dd <= 0) continue;
        const double d = dpoly(t);
        const double kappa = std::abs(dd) / std::pow(1.0 + d * d, 1.5);
        if (kappa > best_kappa) {
            best_kappa = kappa;
            best_t = t;
        }
    }
    if (best_kappa < 0) {
        out.degenerate = true;
        out.lr_max = std::pow(10.0, xs.back());
        out.lr_min = out.lr_max / 10.0;
        return out;
    }
    const double x_knee = x0 + (best_t + 1.0) * (x1 - x0) / 2.0;
    out.lr_max = std::pow(10.0, x_knee);
    out.lr_min = out.lr_max / 10.0;
    return out;
}

namespace {

void fill_batch(const SampleSet& set, const std::vector<int>& order, int begin, int count,
                Tensor4<float>& x, Tensor4<float>& y) {
    x.resize(count, 1, set.rows, set.cols);
    y.resize(count, set.label_dim, 1, 1);
    for (int i = 0; i < count; ++i) {
        const int s = order[static_cast<size_t>(begin + i)];
        std::copy_n(set.image(s), static_cast<size_t>(set.rows) * set.cols, x.sample(i));
        std::copy_n(set.label(s), static_cast<size_t>(set.label_dim), y.sample(i));
    }
}

struct ChunkRange {
    int begin, count;
};

std::vector<ChunkRange> split_chunks(int n, int parts) {
    std::vector<ChunkRange> out;
    const int base = n / parts, rem = n % parts;
    int at = 0;
    for (int p = 0; p < parts; ++p) {
        const int cnt = base + (p < rem ? 1 : 0);
        if (cnt > 0) out.push_back({at, cnt});
        at += cnt;
    }
    return out;
}

}  // namespace

double evaluate_loss(const Network<float>& net, LossKind kind, const SampleSet& set, int batch,
                     int threads) {
    if (set.n == 0) return 0.0;
    const int n_batches = (set.n + batch - 1) / batch;
    std::vector<double> losses(static_cast<size_t>(n_batches), 0.0);
    std::vector<int> counts(static_cast<size_t>(n_batches), 0);
    std::vector<int> order(static_cast<size_t>(set.n));
    for (int i = 0; i < set.n; ++i) order[static_cast<size_t>(i)] = i;

    const auto run = [&](size_t bi) {
        const int begin = static_cast<int>(bi) * batch;
        const int count = std::min(batch, set.n - begin);
        Tensor4<float> x, y, pred;
        fill_batch(set, order, begin, count, x, y);
        typename Network<float>::Ctx ctx;
        Rng rng(0);
        net.forward(x, pred, ctx, /*train=*/false, rng);
        losses[bi] = loss_value(kind, pred, y) * count;
        counts[bi] = count;
    };
    if (threads > 1) {
        parallel_for(static_cast<size_t>(n_batches), threads, run);
    } else {
        for (size_t bi = 0; bi < static_cast<size_t>(n_batches); ++bi) run(bi);
    }
    double total = 0;
    for (double l : losses) total += l;
    return total / set.n;
}

void predict_batch(const Network<float>& net, const float* images, int n, int batch,
                   Tensor4<float>& out, int threads) {
    const int rows = net.spec().in_h, cols = net.spec().in_w;
    out.resize(n, net.spec().outputs, 1, 1);
    const int n_batches = (n + batch - 1) / batch;
    const auto run = [&](size_t bi) {
        const int begin = static_cast<int>(bi) * batch;
        const int count = std::min(batch, n - begin);
        Tensor4<float> x, pred;
        x.resize(count, 1, rows, cols);
        std::copy_n(images + static_cast<size_t>(begin) * rows * cols,
                    static_cast<size_t>(count) * rows * cols, x.v.data());
        typename Network<float>::Ctx ctx;
        Rng rng(0);
        net.forward(x, pred, ctx, false, rng);
        std::copy_n(pred.v.data(), pred.size(), out.sample(begin));
    };
    if (threads > 1) {
        parallel_for(static_cast<size_t>(n_batches), threads, run);
    } else {
        for (size_t bi = 0; bi < static_cast<size_t>(n_batches); ++bi) run(bi);
    }
}

TrainResult train(Network<float>& net, LossKind kind, const SampleSet& train_set,
                  const SampleSet& val_set, const TrainConfig& cfg) {
    if (train_set.n == 0 || val_set.n == 0) throw std::runtime_error("train: empty dataset");
    Adam<float> opt(net.bank());
    const long steps_per_epoch = (train_set.n + cfg.batch - 1) / cfg.batch;
    CyclicalLR sched;
    sched.lr_min = cfg.lr_min;
    sched.lr_max = cfg.lr_max;
    sched.cycle_iters = cfg.cycle_iters > 0 ? cfg.cycle_iters
                                           : std::max<long>(2, cfg.cycle_epochs * steps_per_epoch);

    TrainResult res;
    res.best_val = std::numeric_limits<double>::infinity();
    EarlyStopper stopper(cfg.patience);
    std::vector<int> order(static_cast<size_t>(train_set.n));
    for (int i = 0; i < train_set.n; ++i) order[static_cast<size_t>(i)] = i;

    const int workers = std::max(1, cfg.threads);
    std::vector<ParamBank<float>> worker_grads;
    for (int w = 0; w < workers; ++w) worker_grads.push_back(net.bank().zeros_like());
    ParamBank<float> grads = net.bank().zeros_like();

    long iter = 0;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        // deterministic shuffle (counter-based stream per epoch)
        Rng shuffle_rng(cfg.seed, 0xe90c + static_cast<uint64_t>(epoch));
        for (int i = train_set.n - 1; i > 0; --i) {
            const int j = static_cast<int>(shuffle_rng.uniform_int(static_cast<uint64_t>(i) + 1));
            std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
        }

        double epoch_loss = 0;
        double lr_last = 0;
        for (int begin = 0; begin < train_set.n; begin += cfg.batch) {
            const int count = std::min(cfg.batch, train_set.n - begin);
            const double lr = sched.at(iter);
            lr_last = lr;

            const auto chunks = split_chunks(count, workers);
            std::vector<double> chunk_loss(chunks.size(), 0.0);
            const auto run_chunk = [&](size_t ci) {
                const auto& ch = chunks[ci];
                Tensor4<float> x, y, pred, grad_out;
                fill_batch(train_set, order, begin + ch.begin, ch.count, x, y);
                typename Network<float>::Ctx ctx;
                Rng drop_rng(cfg.seed, 0xd709 ^ (static_cast<uint64_t>(iter) << 8) ^ ci);
                net.forward(x, pred, ctx, /*train=*/true, drop_rng);
                const double l = loss_value(kind, pred, y, &grad_out);
                chunk_loss[ci] = l * ch.count;
                // per-chunk losses normalize by chunk size; rescale so the
                // reduced gradient matches the full-batch mean
                const float scale = static_cast<float>(ch.count) / count;
                for (auto& g : grad_out.v) g *= scale;
                worker_grads[ci].set_zero();
                net.backward(grad_out, ctx, worker_grads[ci]);
            };
            if (workers > 1 && chunks.size() > 1) {
                parallel_for(chunks.size(), workers, run_chunk);
            } else {
                for (size_t ci = 0; ci < chunks.size(); ++ci) run_chunk(ci);
            }

            grads.set_zero();
            for (size_t ci = 0; ci < chunks.size(); ++ci) grads.add_scaled(worker_grads[ci], 1.0f);

            double batch_loss = 0;
            for (double l : chunk_loss) batch_loss += l;
            batch_loss /= count;
            if (!std::isfinite(batch_loss)) {
                std::ostringstream oss;
                oss << "training-diverged: epoch " << epoch << " iteration " << iter;
                throw std::runtime_error(oss.str());
            }
            epoch_loss += batch_loss * count;
            opt.step(net.bank(), grads, lr);
            ++iter;
        }
        epoch_loss /= train_set.n;

        const double val_loss = evaluate_loss(net, kind, val_set, cfg.batch, workers);
        res.history.push_back({epoch, epoch_loss, val_loss, lr_last});
        fprintf(stderr, "    epoch %3d  train %.5g  val %.5g  lr %.3g\n", epoch, epoch_loss,
                val_loss, lr_last);

        const bool stop = stopper.observe(val_loss);
        if (stopper.best_epoch() == epoch) {
            res.best_val = val_loss;
            res.best_epoch = epoch;
            res.best_params = net.bank();
        }
        res.stopped_epoch = epoch;
        if (stop) break;
    }

    if (res.best_epoch > 0) net.bank() = res.best_params;
    return res;
}

void save_checkpoint(const Network<float>& net, const std::string& basename, int epoch,
                     double val_loss, uint64_t seed) {
    const NetworkSpec& s = net.spec();
    json manifest;
    manifest["format_version"] = 1;
    manifest["kind"] = "checkpoint";
    manifest["epoch"] = epoch;
    manifest["val_loss"] = val_loss;
    manifest["seed"] = seed;
    manifest["spec"] = {{"in_h", s.in_h},
                        {"in_w", s.in_w},
                        {"use_norm", s.use_norm},
                        {"stem_channels", s.stem_channels},
                        {"stem_kernel", s.stem_kernel},
                        {"stem_stride", s.stem_stride},
                        {"stage_blocks", s.stage_blocks},
                        {"stage_width", s.stage_width},
                        {"cardinality", s.cardinality},
                        {"bottleneck_div", s.bottleneck_div},
                        {"fc_dim", s.fc_dim},
                        {"dropout", s.dropout},
                        {"outputs", s.outputs},
                        {"init_seed", s.init_seed}};
    std::vector<size_t> sizes;
    for (const auto& p : net.bank().p) sizes.push_back(p.size());
    manifest["param_sizes"] = sizes;
    write_text_file(basename + ".json", manifest.dump(2));

    std::ofstream bin(basename + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("checkpoint: cannot write blob");
    for (const auto& p : net.bank().p) write_array(bin, p);
}

Network<float> load_checkpoint(const std::string& basename) {
    const json manifest = json::parse(read_text_file(basename + ".json"));
    if (manifest.at("kind") != "checkpoint") throw std::runtime_error("not a checkpoint");
    const auto& js = manifest.at("spec");
    NetworkSpec s;
    s.in_h = js.at("in_h");
    s.in_w = js.at("in_w");
    s.stem_channels = js.at("stem_channels");
    s.stem_kernel = js.at("stem_kernel");
    s.stem_stride = js.at("stem_stride");
    s.stage_blocks = js.at("stage_blocks").get<std::vector<int>>();
    s.stage_width = js.at("stage_width").get<std::vector<int>>();
    s.cardinality = js.at("cardinality");
    s.bottleneck_div = js.at("bottleneck_div");
    s.fc_dim = js.at("fc_dim");
    s.dropout = js.at("dropout");
    s.outputs = js.at("outputs");
    if (js.contains("use_norm")) s.use_norm = js.at("use_norm");
    s.init_seed = js.at("init_seed");
    Network<float> net(s);

    const auto sizes = manifest.at("param_sizes").get<std::vector<size_t>>();
    if (sizes.size() != net.bank().p.size())
        throw std::runtime_error("checkpoint: parameter layout mismatch");
    std::ifstream bin(basename + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("checkpoint: cannot open blob");
    for (size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] != net.bank().p[i].size())
            throw std::runtime_error("checkpoint: parameter size mismatch");
        net.bank().p[i] = read_array<float>(bin, sizes[i]);
    }
    return net;
}

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("history: cannot write " + path);
    f << "epoch,train_loss,val_loss,lr\n";
    for (const auto& e : history)
        f << e.epoch << "," << e.train_loss << "," << e.val_loss << "," << e.lr_last << "\n";
}

}  // namespace vloc::nn
