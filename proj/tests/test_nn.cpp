#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <functional>

#include "vloc/nn/train.hpp"

using namespace vloc;
using namespace vloc::nn;

namespace {

// Scalar probe s = sum(r .* out) with fixed random r; analytic gradients are
// checked coordinate-wise against central finite differences.
struct GradCheck {
    double max_rel_err = 0.0;

    template <typename Forward>
    void check_params(ParamBank<double>& bank, ParamBank<double>& grads, const Forward& fwd,
                      double eps = 1e-6) {
        for (size_t pi = 0; pi < bank.p.size(); ++pi) {
            for (size_t j = 0; j < bank.p[pi].size(); ++j) {
                const double save = bank.p[pi][j];
                bank.p[pi][j] = save + eps;
                const double sp = fwd();
                bank.p[pi][j] = save - eps;
                const double sm = fwd();
                bank.p[pi][j] = save;
                const double numeric = (sp - sm) / (2 * eps);
                const double analytic = grads.p[pi][j];
                const double denom = std::max({1e-6, std::abs(numeric), std::abs(analytic)});
                max_rel_err = std::max(max_rel_err, std::abs(numeric - analytic) / denom);
            }
        }
    }

    void check_input(Tensor4<double>& x, const Tensor4<double>& grad_in,
                     const std::function<double()>& fwd, double eps = 1e-6) {
        for (size_t j = 0; j < x.v.size(); ++j) {
            const double save = x.v[j];
            x.v[j] = save + eps;
            const double sp = fwd();
            x.v[j] = save - eps;
            const double sm = fwd();
            x.v[j] = save;
            const double numeric = (sp - sm) / (2 * eps);
            const double analytic = grad_in.v[j];
            const double denom = std::max({1e-6, std::abs(numeric), std::abs(analytic)});
            max_rel_err = std::max(max_rel_err, std::abs(numeric - analytic) / denom);
        }
    }
};

Tensor4<double> random_tensor(int n, int c, int h, int w, Rng& rng, double lo = -1, double hi = 1) {
    Tensor4<double> t;
    t.resize(n, c, h, w);
    for (auto& v : t.v) v = rng.uniform(lo, hi);
    return t;
}

double probe(const Tensor4<double>& out, const std::vector<double>& r) {
    double s = 0;
    for (size_t i = 0; i < out.v.size(); ++i) s += out.v[i] * r[i];
    return s;
}

std::vector<double> random_probe(size_t n, Rng& rng) {
    std::vector<double> r(n);
    for (auto& v : r) v = rng.uniform(-1, 1);
    return r;
}

}  // namespace

TEST_CASE("gradcheck: plain, grouped and strided convolutions") {
    Rng rng(11);
    for (const auto& [cin, cout, k, stride, pad, groups] :
         std::vector<std::array<int, 6>>{{3, 4, 3, 1, 1, 1}, {4, 8, 3, 2, 1, 4}, {2, 6, 1, 1, 0, 2}, {3, 5, 5, 2, 2, 1}}) {
        ParamBank<double> bank;
        Conv2d<double> conv{cin, cout, k, stride, pad, groups};
        Rng init_rng(1);
        conv.init(bank, init_rng);
        Tensor4<double> x = random_tensor(2, cin, 7, 8, rng);
        Conv2d<double>::Ctx ctx;
        Tensor4<double> out;
        conv.forward(bank, x, out, ctx);
        const auto r = random_probe(out.size(), rng);

        auto fwd = [&]() {
            Conv2d<double>::Ctx c2;
            Tensor4<double> o;
            conv.forward(bank, x, o, c2);
            return probe(o, r);
        };
        Tensor4<double> grad_out;
        grad_out.resize(out.n, out.c, out.h, out.w);
        for (size_t i = 0; i < r.size(); ++i) grad_out.v[i] = r[i];
        ParamBank<double> grads = bank.zeros_like();
        Tensor4<double> grad_in;
        conv.backward(bank, grads, ctx, grad_out, grad_in);

        GradCheck gc;
        gc.check_params(bank, grads, fwd);
        gc.check_input(x, grad_in, fwd);
        CHECK(gc.max_rel_err < 1e-4);
    }
}

TEST_CASE("gradcheck: channel norm") {
    Rng rng(13);
    ParamBank<double> bank;
    ChannelNorm<double> norm;
    norm.channels = 3;
    norm.init(bank);
    // non-trivial affine parameters
    for (auto& g : bank.p[0]) g = rng.uniform(0.5, 1.5);
    for (auto& b : bank.p[1]) b = rng.uniform(-0.3, 0.3);
    Tensor4<double> x = random_tensor(2, 3, 5, 6, rng);
    ChannelNorm<double>::Ctx ctx;
    Tensor4<double> out;
    norm.forward(bank, x, out, ctx);
    const auto r = random_probe(out.size(), rng);
    auto fwd = [&]() {
        ChannelNorm<double>::Ctx c2;
        Tensor4<double> o;
        norm.forward(bank, x, o, c2);
        return probe(o, r);
    };
    Tensor4<double> grad_out;
    grad_out.resize(out.n, out.c, out.h, out.w);
    for (size_t i = 0; i < r.size(); ++i) grad_out.v[i] = r[i];
    ParamBank<double> grads = bank.zeros_like();
    Tensor4<double> grad_in;
    norm.backward(bank, grads, ctx, grad_out, grad_in);
    GradCheck gc;
    gc.check_params(bank, grads, fwd);
    gc.check_input(x, grad_in, fwd);
    CHECK(gc.max_rel_err < 1e-4);
}

TEST_CASE("gradcheck: max pool, relu, gap, linear, dropout in eval mode") {
    Rng rng(17);

    {
        MaxPool2d<double> pool;
        Tensor4<double> x = random_tensor(2, 3, 7, 9, rng);
        MaxPool2d<double>::Ctx ctx;
        Tensor4<double> out;
        pool.forward(x, out, ctx);
        const auto r = random_probe(out.size(), rng);
        auto fwd = [&]() {
            MaxPool2d<double>::Ctx c2;
            Tensor4<double> o;
            pool.forward(x, o, c2);
            return probe(o, r);
        };
        Tensor4<double> grad_out;
        grad_out.resize(out.n, out.c, out.h, out.w);
        for (size_t i = 0; i < r.size(); ++i) grad_out.v[i] = r[i];
        Tensor4<double> grad_in;
        pool.backward(ctx, grad_out, grad_in);
        GradCheck gc;
        gc.check_input(x, grad_in, fwd);
        CHECK(gc.max_rel_err < 1e-4);
    }
    {
        ReLU<double> relu;
        Tensor4<double> x = random_tensor(2, 3, 4, 4, rng);
        for (auto& v : x.v)  // keep inputs away from the kink
            if (std::abs(v) < 0.05) v = 0.1;
        ReLU<double>::Ctx ctx;
        Tensor4<double> out;
        relu.forward(x, out, ctx);
        const auto r = random_probe(out.size(), rng);
        auto fwd = [&]() {
            ReLU<double>::Ctx c2;
            Tensor4<double> o;
            relu.forward(x, o, c2);
            return probe(o, r);
        };
        Tensor4<double> grad_out;
        grad_out.resize(out.n, out.c, out.h, out.w);
        for (size_t i = 0; i < r.size(); ++i) grad_out.v[i] = r[i];
        Tensor4<double> grad_in;
        relu.backward(ctx, grad_out, grad_in);
        GradCheck gc;
        gc.check_input(x, grad_in, fwd);
        CHECK(gc.max_rel_err < 1e-4);
    }
    {
        GlobalAvgPool<double> gap;
        Tensor4<double> x = random_tensor(3, 4, 5, 5, rng);
        GlobalAvgPool<double>::Ctx ctx;
        Tensor4<double> out;
        gap.forward(x, out, ctx);
        const auto r = random_probe(out.size(), rng);
        auto fwd = [&]() {
            GlobalAvgPool<double>::Ctx c2;
            Tensor4<double> o;
            gap.forward(x, o, c2);
            return probe(o, r);
        };
        Tensor4<double> grad_out;
        grad_out.resize(out.n, out.c, 1, 1);
        for (size_t i = 0; i < r.size(); ++i) grad_out.v[i] = r[i];
        Tensor4<double> grad_in;
        gap.backward(ctx, grad_out, grad_in);
        GradCheck gc;
        gc.check_input(x, grad_in, fwd);
        CHECK(gc.max_rel_err < 1e-4);
    }
    {
        ParamBank<double> bank;
        Linear<double> lin{6, 4};
        Rng init_rng(2);
        lin.init(bank, init_rng);
        Tensor4<double> x = random_tensor(3, 6, 1, 1, rng);
        Linear<double>::Ctx ctx;
        Tensor4<double> out;
        lin.forward(bank, x, out, ctx);
        const auto r = random_probe(out.size(), rng);
        auto fwd = [&]() {
            Linear<double>::Ctx c2;
            Tensor4<double> o;
            lin.forward(bank, x, o, c2);
            return probe(o, r);
        };
        Tensor4<double> grad_out;
        grad_out.resize(3, 4, 1, 1);
        for (size_t i = 0; i < r.size(); ++i) grad_out.v[i] = r[i];
        ParamBank<double> grads = bank.zeros_like();
        Tensor4<double> grad_in;
        lin.backward(bank, grads, ctx, grad_out, grad_in);
        GradCheck gc;
        gc.check_params(bank, grads, fwd);
        gc.check_input(x, grad_in, fwd);
        CHECK(gc.max_rel_err < 1e-4);
    }
    {
        // dropout in eval mode is the identity with unit jacobian
        Dropout<double> drop;
        Tensor4<double> x = random_tensor(2, 3, 4, 4, rng);
        Dropout<double>::Ctx ctx;
        Tensor4<double> out;
        Rng drng(3);
        drop.forward(x, out, ctx, /*train=*/false, drng);
        CHECK(out.v == x.v);
        Tensor4<double> grad_out = random_tensor(2, 3, 4, 4, rng);
        Tensor4<double> grad_in;
        drop.backward(ctx, grad_out, grad_in);
        CHECK(grad_in.v == grad_out.v);
    }
}

TEST_CASE("gradcheck: all three losses against finite differences") {
    Rng rng(23);
    GradCheck gc;

    auto check_loss = [&](LossKind kind, Tensor4<double> pred, const Tensor4<double>& labels) {
        Tensor4<double> grad;
        loss_value(kind, pred, labels, &grad);
        auto fwd = [&]() { return loss_value(kind, pred, labels); };
        gc.check_input(pred, grad, fwd, 1e-6);
    };

    {
        Tensor4<double> pred = random_tensor(4, 2, 1, 1, rng, 0.0, 1.0);
        Tensor4<double> labels = random_tensor(4, 2, 1, 1, rng, 0.0, 1.0);
        check_loss(LossKind::ScaleNet, pred, labels);
    }
    {
        Tensor4<double> pred = random_tensor(4, 5, 1, 1, rng, -1.5, 1.5);
        Tensor4<double> labels;
        labels.resize(4, 5, 1, 1);
        for (int s = 0; s < 4; ++s) {
            double* l = labels.sample(s);
            l[0] = rng.uniform(0.05, 0.95);
            const double phi = rng.uniform(0, 2 * M_PI);
            l[1] = std::sin(phi);
            l[2] = std::cos(phi);
            l[3] = rng.uniform() < 0.5 ? 0.0 : 1.0;
            l[4] = rng.uniform() < 0.5 ? 0.0 : 1.0;
        }
        check_loss(LossKind::RegNet, pred, labels);
    }
    {
        const int C = 7;
        Tensor4<double> pred = random_tensor(3, C, 1, 1, rng, -2, 2);
        Tensor4<double> labels;
        labels.resize(3, C, 1, 1);
        for (int s = 0; s < 3; ++s) {
            double* l = labels.sample(s);
            double sum = 0;
            for (int i = 0; i < C; ++i) {
                l[i] = rng.uniform(0.01, 1.0);
                sum += l[i];
            }
            for (int i = 0; i < C; ++i) l[i] /= sum;
        }
        check_loss(LossKind::ClassNet, pred, labels);
    }
    CHECK(gc.max_rel_err < 1e-4);
}

TEST_CASE("gradcheck: full network end to end (double)") {
    NetworkSpec spec;
    spec.in_h = 16;
    spec.in_w = 20;
    spec.stem_channels = 4;
    spec.stem_kernel = 3;
    spec.stage_blocks = {1, 1};
    spec.stage_width = {4, 8};
    spec.cardinality = 2;
    spec.fc_dim = 6;
    spec.dropout = 0.0;  // deterministic for the check
    spec.outputs = 3;
    Network<double> net(spec);
    Rng rng(31);
    Tensor4<double> x = random_tensor(2, 1, 16, 20, rng);

    Network<double>::Ctx ctx;
    Tensor4<double> out;
    Rng drng(1);
    net.forward(x, out, ctx, /*train=*/true, drng);
    const auto r = random_probe(out.size(), rng);
    Tensor4<double> grad_out;
    grad_out.resize(out.n, out.c, 1, 1);
    for (size_t i = 0; i < r.size(); ++i) grad_out.v[i] = r[i];
    ParamBank<double> grads = net.bank().zeros_like();
    net.backward(grad_out, ctx, grads);

    auto fwd = [&]() {
        Network<double>::Ctx c2;
        Tensor4<double> o;
        Rng d2(1);
        net.forward(x, o, c2, true, d2);
        return probe(o, r);
    };
    GradCheck gc;
    // subsample parameters for speed: every 7th coordinate
    for (size_t pi = 0; pi < net.bank().p.size(); ++pi) {
        for (size_t j = 0; j < net.bank().p[pi].size(); j += 7) {
            double& w = net.bank().p[pi][j];
            const double save = w;
            const double eps = 1e-6;
            w = save + eps;
            const double sp = fwd();
            w = save - eps;
            const double sm = fwd();
            w = save;
            const double numeric = (sp - sm) / (2 * eps);
            const double analytic = grads.p[pi][j];
            const double denom = std::max({1e-6, std::abs(numeric), std::abs(analytic)});
            gc.max_rel_err = std::max(gc.max_rel_err, std::abs(numeric - analytic) / denom);
        }
    }
    CHECK(gc.max_rel_err < 1e-4);
}

TEST_CASE("he initialization: weight variance near 2/fan_in") {
    ParamBank<float> bank;
    Conv2d<float> conv{64, 64, 3, 1, 1, 1};
    Rng rng(5);
    conv.init(bank, rng);
    const auto& w = bank.p[0];
    double mean = 0;
    for (float v : w) mean += v;
    mean /= static_cast<double>(w.size());
    double var = 0;
    for (float v : w) var += (v - mean) * (v - mean);
    var /= static_cast<double>(w.size());
    const double expected = 2.0 / (64 * 9);
    CHECK(std::abs(var - expected) / expected < 0.10);
}

TEST_CASE("dropout: train-mode expectation matches eval output") {
    Dropout<float> drop;
    drop.rate = 0.2;
    Tensor4<float> x;
    x.resize(1, 1, 20, 20);
    for (auto& v : x.v) v = 1.0f;
    Rng rng(9);
    Tensor4<float> acc;
    acc.resize(1, 1, 20, 20);
    const int reps = 4000;
    for (int i = 0; i < reps; ++i) {
        Dropout<float>::Ctx ctx;
        Tensor4<float> out;
        drop.forward(x, out, ctx, true, rng);
        for (size_t j = 0; j < out.v.size(); ++j) acc.v[j] += out.v[j];
    }
    double total = 0;
    for (float v : acc.v) total += v / reps;
    const double mean = total / static_cast<double>(acc.v.size());
    CHECK(std::abs(mean - 1.0) < 0.01);  // inverted dropout, eval = identity
}

TEST_CASE("cyclical lr: attains the extremes exactly once per cycle") {
    CyclicalLR sched;
    sched.lr_min = 1e-4;
    sched.lr_max = 1e-3;
    sched.cycle_iters = 100;
    int n_min = 0, n_max = 0;
    for (long t = 0; t < 100; ++t) {
        const double lr = sched.at(t);
        CHECK(lr >= sched.lr_min - 1e-15);
        CHECK(lr <= sched.lr_max + 1e-15);
        n_min += lr == sched.lr_min;
        n_max += lr == sched.lr_max;
    }
    CHECK(n_min == 1);
    CHECK(n_max == 1);
    // piecewise linear: constant slope magnitude
    const double d1 = sched.at(1) - sched.at(0);
    const double d2 = sched.at(2) - sched.at(1);
    CHECK(d1 == doctest::Approx(d2));
}

TEST_CASE("adam: first-step magnitude, zero gradients, elementwise symmetry") {
    ParamBank<float> params;
    params.add(4);
    for (auto& p : params.p[0]) p = 1.0f;
    ParamBank<float> grads = params.zeros_like();
    for (auto& g : grads.p[0]) g = 1.0f;
    Adam<float> opt(params);
    opt.step(params, grads, 0.001);
    // bias corrections cancel at t=1: delta = -lr * g/|g| = -lr
    for (float p : params.p[0]) CHECK(p == doctest::Approx(1.0 - 0.001).epsilon(1e-6));
    // equal histories give equal updates
    CHECK(params.p[0][0] == params.p[0][3]);
    // zero gradient: no movement
    ParamBank<float> zeros = params.zeros_like();
    ParamBank<float> params2 = params;
    Adam<float> opt2(params2);
    opt2.step(params2, zeros, 0.001);
    for (size_t i = 0; i < 4; ++i) CHECK(params2.p[0][i] == params.p[0][i]);
}

TEST_CASE("lr range test: quadratic oracle stays below the stability bound") {
    // Gradient descent on f(w) = 0.5 sum(lambda_i w_i^2): diverges above 2/L.
    const std::vector<double> lambda = {4.0, 1.0, 0.2};
    const double L = 4.0;
    std::vector<double> w = {3.0, -2.0, 1.5};
    auto step = [&](double lr) {
        for (size_t i = 0; i < w.size(); ++i) w[i] -= lr * lambda[i] * w[i];
        double f = 0;
        for (size_t i = 0; i < w.size(); ++i) f += 0.5 * lambda[i] * w[i] * w[i];
        return f;
    };
    const RangeTestResult res = lr_range_test(step, 1e-4, 10.0, 80);
    CHECK(res.lr_min < res.lr_max);
    CHECK(res.lr_max < 2.0 / L);

    // flat curve: flagged and widest range returned
    auto flat = [&](double) { return 1.0; };
    const RangeTestResult deg = lr_range_test(flat, 1e-4, 1.0, 60);
    CHECK(deg.degenerate);
    CHECK(deg.lr_min < deg.lr_max);
}

TEST_CASE("losses: worked examples") {
    // scalenet: one sample off by (0.1, 0)
    {
        Tensor4<double> pred, label;
        pred.resize(1, 2, 1, 1);
        label.resize(1, 2, 1, 1);
        pred.v = {0.6, 0.4};
        label.v = {0.5, 0.4};
        CHECK(loss_scalenet(pred, label) == doctest::Approx(0.005));
        // permutation invariance over the batch
        Tensor4<double> p2, l2;
        p2.resize(2, 2, 1, 1);
        l2.resize(2, 2, 1, 1);
        p2.v = {0.6, 0.4, 0.2, 0.9};
        l2.v = {0.5, 0.4, 0.25, 0.8};
        Tensor4<double> p3 = p2, l3 = l2;
        std::swap_ranges(p3.v.begin(), p3.v.begin() + 2, p3.v.begin() + 2);
        std::swap_ranges(l3.v.begin(), l3.v.begin() + 2, l3.v.begin() + 2);
        CHECK(loss_scalenet(p2, l2) == doctest::Approx(loss_scalenet(p3, l3)));
    }
    // regnet: perfect continuous predictions, saturated correct logits
    {
        Tensor4<double> pred, label;
        pred.resize(1, 5, 1, 1);
        label.resize(1, 5, 1, 1);
        label.v = {0.7, std::sin(1.0), std::cos(1.0), 1.0, 0.0};
        pred.v = {0.7, std::sin(1.0), std::cos(1.0), 10.0, -10.0};
        CHECK(loss_regnet(pred, label) ==
              doctest::Approx(2.0 * std::log1p(std::exp(-10.0))).epsilon(1e-6));

        // apicobasal miss of 0.2 with everything else saturated-perfect
        label.v = {1.0, 0.0, 1.0, 1.0, 1.0};
        pred.v = {0.8, 0.0, 1.0, 30.0, 30.0};
        CHECK(loss_regnet(pred, label) == doctest::Approx(0.25).epsilon(1e-6));

        // l_a = 0: rotational terms vanish regardless of prediction
        label.v = {0.0, 0.0, 1.0, 1.0, 1.0};
        pred.v = {0.0, 0.77, -0.31, 30.0, 30.0};
        CHECK(loss_regnet(pred, label) == doctest::Approx(0.0).epsilon(1e-9));

        // closed-form gradient of the apicobasal term
        label.v = {0.9, 0.0, 1.0, 1.0, 1.0};
        pred.v = {0.6, 0.0, 1.0, 30.0, 30.0};
        Tensor4<double> grad;
        loss_regnet(pred, label, &grad);
        CHECK(grad.v[0] == doctest::Approx(-2.0 * 6.25 * (0.9 - 0.6)).epsilon(1e-9));
    }
    // classnet: one-hot + uniform logits, entropy case, shift invariance
    {
        const int C = 11;
        Tensor4<double> pred, label;
        pred.resize(1, C, 1, 1);
        label.resize(1, C, 1, 1);
        for (auto& z : pred.v) z = 0.42;
        label.v.assign(static_cast<size_t>(C), 0.0);
        label.v[3] = 1.0;
        CHECK(loss_classnet(pred, label) == doctest::Approx(std::log(C)).epsilon(1e-9));

        Tensor4<double> p2, l2;
        p2.resize(1, 3, 1, 1);
        l2.resize(1, 3, 1, 1);
        l2.v = {0.5, 0.25, 0.25};
        p2.v = {std::log(0.5), std::log(0.25), std::log(0.25)};
        CHECK(loss_classnet(p2, l2) == doctest::Approx(1.0397207708399179).epsilon(1e-9));
        for (auto& z : p2.v) z += 5.0;  // softmax shift invariance
        CHECK(loss_classnet(p2, l2) == doctest::Approx(1.0397207708399179).epsilon(1e-9));
    }
}

TEST_CASE("network: determinism, constant head, residual skip") {
    NetworkSpec spec;
    spec.in_h = 16;
    spec.in_w = 16;
    spec.stem_channels = 4;
    spec.stem_kernel = 3;
    spec.stage_blocks = {2};
    spec.stage_width = {4};  // equals stem channels: first block has no projection
    spec.cardinality = 2;
    spec.fc_dim = 6;
    spec.outputs = 2;
    Network<float> net(spec);

    Rng rng(3);
    Tensor4<float> x;
    x.resize(2, 1, 16, 16);
    for (auto& v : x.v) v = static_cast<float>(rng.uniform(-1, 1));

    Network<float>::Ctx ctx;
    Tensor4<float> out1, out2;
    Rng d1(0), d2(0);
    net.forward(x, out1, ctx, false, d1);
    net.forward(x, out2, ctx, false, d2);
    CHECK(out1.v == out2.v);  // eval mode is deterministic

    // zero-initialized head: constant output across inputs
    Network<float> zero_head(spec);
    auto& bank = zero_head.bank();
    for (auto& w : bank.p[bank.p.size() - 2]) w = 0.0f;  // head weight
    for (auto& b : bank.p[bank.p.size() - 1]) b = 0.5f;  // head bias
    Tensor4<float> y;
    zero_head.forward(x, y, ctx, false, d1);
    CHECK(y.v[0] == doctest::Approx(0.5f));
    CHECK(y.v[0] == y.v[2]);

    // zeroing a block's expand stage makes the whole block an identity:
    // the output must then ignore that block's reduce/conv parameters
    Network<float> a(spec), b(spec);
    // locate block 0's parameter indices: stem(w,b) + stem_norm(g,b) -> 4,
    // block0: reduce(w,b) n1(g,b) conv(w,b) n2(g,b) expand(w,b) n3(g,b)
    const int reduce_w = 4, expand_w = 12, expand_b = 13;
    for (auto* net_p : {&a, &b}) {
        for (auto& w : net_p->bank().p[expand_w]) w = 0.0f;
        for (auto& w : net_p->bank().p[expand_b]) w = 0.0f;
    }
    for (auto& w : b.bank().p[reduce_w]) w += 0.37f;  // must not matter
    Tensor4<float> oa, ob;
    a.forward(x, oa, ctx, false, d1);
    b.forward(x, ob, ctx, false, d1);
    for (size_t i = 0; i < oa.v.size(); ++i) CHECK(oa.v[i] == doctest::Approx(ob.v[i]));
}

TEST_CASE("training: learnable task, determinism, patience trace") {
    // Labels are fixed linear functions of the image mean.
    NetworkSpec spec;
    spec.in_h = 16;
    spec.in_w = 16;
    spec.stem_channels = 4;
    spec.stem_kernel = 3;
    spec.stage_blocks = {1};
    spec.stage_width = {8};
    spec.cardinality = 2;
    spec.fc_dim = 8;
    spec.dropout = 0.0;
    spec.outputs = 2;
    spec.init_seed = 4;

    auto make_set = [&](int n, uint64_t seed) {
        SampleSet s;
        s.n = n;
        s.rows = 16;
        s.cols = 16;
        s.label_dim = 2;
        s.images.resize(static_cast<size_t>(n) * 256);
        s.labels.resize(static_cast<size_t>(n) * 2);
        Rng rng(seed);
        for (int i = 0; i < n; ++i) {
            float mean = 0;
            for (int p = 0; p < 256; ++p) {
                const float v = static_cast<float>(rng.uniform(0, 1));
                s.images[static_cast<size_t>(i) * 256 + p] = v;
                mean += v / 256.0f;
            }
            s.labels[static_cast<size_t>(i) * 2] = 0.2f + 0.6f * mean;
            s.labels[static_cast<size_t>(i) * 2 + 1] = 0.8f - 0.5f * mean;
        }
        return s;
    };
    const SampleSet train_set = make_set(64, 100);
    const SampleSet val_set = make_set(16, 200);

    TrainConfig cfg;
    cfg.batch = 8;
    cfg.max_epochs = 20;
    cfg.seed = 5;
    cfg.lr_min = 1e-3;
    cfg.lr_max = 6e-3;

    Network<float> net(spec);
    const double loss0 = evaluate_loss(net, LossKind::ScaleNet, train_set, 8, 1);
    const TrainResult res = train(net, LossKind::ScaleNet, train_set, val_set, cfg);
    const double loss1 = evaluate_loss(net, LossKind::ScaleNet, train_set, 8, 1);
    CHECK(loss1 < loss0 / 100.0);

    // determinism: same seed, same history
    Network<float> net2(spec);
    const TrainResult res2 = train(net2, LossKind::ScaleNet, train_set, val_set, cfg);
    REQUIRE(res2.history.size() == res.history.size());
    for (size_t e = 0; e < res.history.size(); ++e) {
        CHECK(res2.history[e].train_loss == res.history[e].train_loss);
        CHECK(res2.history[e].val_loss == res.history[e].val_loss);
    }

    // patience rule trace on a synthetic validation curve
    EarlyStopper stopper(5);
    const double curve[] = {1.0, 0.9, 0.91, 0.92, 0.93, 0.94, 0.95};
    bool stopped = false;
    int stop_epoch = 0;
    for (int i = 0; i < 7 && !stopped; ++i) {
        stopped = stopper.observe(curve[i]);
        stop_epoch = i + 1;
    }
    CHECK(stopped);
    CHECK(stop_epoch == 7);
    CHECK(stopper.best_epoch() == 2);
}

TEST_CASE("checkpoint roundtrip preserves outputs") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "vloc_ckpt_test";
    fs::create_directories(dir);
    NetworkSpec spec;
    spec.in_h = 16;
    spec.in_w = 16;
    spec.stem_channels = 4;
    spec.stem_kernel = 3;
    spec.stage_blocks = {1};
    spec.stage_width = {4};
    spec.cardinality = 2;
    spec.fc_dim = 4;
    spec.outputs = 3;
    Network<float> net(spec);
    save_checkpoint(net, (dir / "ck").string(), 7, 0.123, 42);
    Network<float> rt = load_checkpoint((dir / "ck").string());

    Rng rng(8);
    Tensor4<float> x;
    x.resize(1, 1, 16, 16);
    for (auto& v : x.v) v = static_cast<float>(rng.uniform(-1, 1));
    Network<float>::Ctx ctx;
    Tensor4<float> a, b;
    Rng d(0);
    net.forward(x, a, ctx, false, d);
    rt.forward(x, b, ctx, false, d);
    CHECK(a.v == b.v);
    fs::remove_all(dir);
}
