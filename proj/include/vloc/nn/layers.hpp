#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "vloc/core/rng.hpp"
#include "vloc/nn/tensor.hpp"

namespace vloc::nn {

template <typename T>
using MatX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using MatXR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline int conv_out_dim(int in, int k, int stride, int pad) {
    return (in + 2 * pad - k) / stride + 1;
}

// ---------------------------------------------------------------------------
// Grouped 2-D convolution (im2col + GEMM). The column matrix is rebuilt in
// the backward pass instead of being cached.
template <typename T>
struct Conv2d {
    int cin = 0, cout = 0, k = 3, stride = 1, pad = 1, groups = 1;
    int wi = -1, bi = -1;

    struct Ctx {
        Tensor4<T> in;
        int ho = 0, wo = 0;
    };

    void init(ParamBank<T>& bank, Rng& rng) {
        const int fan_in = (cin / groups) * k * k;
        wi = bank.add(static_cast<size_t>(cout) * fan_in);
        bi = bank.add(static_cast<size_t>(cout));
        const double stddev = std::sqrt(2.0 / fan_in);  // He initialization
        for (auto& w : bank.p[static_cast<size_t>(wi)]) w = static_cast<T>(rng.normal(0.0, stddev));
    }

    void im2col(const Tensor4<T>& in, int sample, int group, MatX<T>& col, int ho, int wo) const {
        const int cg = cin / groups;
        col.resize(cg * k * k, ho * wo);
        for (int ch = 0; ch < cg; ++ch) {
            const T* src = in.channel(sample, group * cg + ch);
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    const int row = (ch * k + ky) * k + kx;
                    for (int oy = 0; oy < ho; ++oy) {
                        const int iy = oy * stride + ky - pad;
                        for (int ox = 0; ox < wo; ++ox) {
                            const int ix = ox * stride + kx - pad;
                            col(row, oy * wo + ox) =
                                (iy >= 0 && iy < in.h && ix >= 0 && ix < in.w)
                                    ? src[iy * in.w + ix]
                                    : T(0);
                        }
                    }
                }
            }
        }
    }

    void forward(const ParamBank<T>& bank, const Tensor4<T>& in, Tensor4<T>& out, Ctx& ctx) const {
        if (in.c != cin) throw std::runtime_error("conv: channel mismatch");
        const int ho = conv_out_dim(in.h, k, stride, pad);
        const int wo = conv_out_dim(in.w, k, stride, pad);
        out.resize(in.n, cout, ho, wo);
        ctx.in = in;
        ctx.ho = ho;
        ctx.wo = wo;
        const int cg = cin / groups, og = cout / groups, fan = cg * k * k;
        MatX<T> col;
        for (int s = 0; s < in.n; ++s) {
            for (int g = 0; g < groups; ++g) {
                im2col(in, s, g, col, ho, wo);
                Eigen::Map<const MatXR<T>> W(bank.p[static_cast<size_t>(wi)].data() +
                                                 static_cast<size_t>(g) * og * fan,
                                             og, fan);
                Eigen::Map<MatXR<T>> O(out.channel(s, g * og), og, ho * wo);
                O.noalias() = W * col;
                for (int oc = 0; oc < og; ++oc)
                    O.row(oc).array() += bank.p[static_cast<size_t>(bi)][static_cast<size_t>(g * og + oc)];
            }
        }
    }

    void backward(const ParamBank<T>& bank, ParamBank<T>& grads, const Ctx& ctx,
                  const Tensor4<T>& grad_out, Tensor4<T>& grad_in) const {
        const int ho = ctx.ho, wo = ctx.wo;
        const int cg = cin / groups, og = cout / groups, fan = cg * k * k;
        grad_in.resize(ctx.in.n, cin, ctx.in.h, ctx.in.w);
        MatX<T> col, gcol;
        for (int s = 0; s < ctx.in.n; ++s) {
            for (int g = 0; g < groups; ++g) {
                im2col(ctx.in, s, g, col, ho, wo);
                Eigen::Map<const MatXR<T>> GO(grad_out.channel(s, g * og), og, ho * wo);
                Eigen::Map<MatXR<T>> GW(grads.p[static_cast<size_t>(wi)].data() +
                                            static_cast<size_t>(g) * og * fan,
                                        og, fan);
                GW.noalias() += GO * col.transpose();
                for (int oc = 0; oc < og; ++oc)
                    grads.p[static_cast<size_t>(bi)][static_cast<size_t>(g * og + oc)] += GO.row(oc).sum();
                Eigen::Map<const MatXR<T>> W(bank.p[static_cast<size_t>(wi)].data() +
                                                 static_cast<size_t>(g) * og * fan,
                                             og, fan);
                gcol.noalias() = W.transpose() * GO;
                // col2im accumulate
                for (int ch = 0; ch < cg; ++ch) {
                    T* dst = grad_in.channel(s, g * cg + ch);
                    for (int ky = 0; ky < k; ++ky) {
                        for (int kx = 0; kx < k; ++kx) {
                            const int row = (ch * k + ky) * k + kx;
                            for (int oy = 0; oy < ho; ++oy) {
                                const int iy = oy * stride + ky - pad;
                                if (iy < 0 || iy >= ctx.in.h) continue;
                                for (int ox = 0; ox < wo; ++ox) {
                                    const int ix = ox * stride + kx - pad;
                                    if (ix < 0 || ix >= ctx.in.w) continue;
                                    dst[iy * ctx.in.w + ix] += gcol(row, oy * wo + ox);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Per-sample, per-channel standardization with a learned affine map; the
// normalization-free stand-in for the reference blocks' batch norm.
template <typename T>
struct ChannelNorm {
    int channels = 0;
    int gi = -1, bi = -1;
    bool enabled = true;  // disabled: identity (normalization-free blocks)
    static constexpr double kEps = 1e-5;

    struct Ctx {
        Tensor4<T> xhat;
        std::vector<T> inv_std;  // n * c
    };

    void init(ParamBank<T>& bank) {
        gi = bank.add(static_cast<size_t>(channels));
        bi = bank.add(static_cast<size_t>(channels));
        for (auto& g : bank.p[static_cast<size_t>(gi)]) g = T(1);
    }

    void forward(const ParamBank<T>& bank, const Tensor4<T>& in, Tensor4<T>& out, Ctx& ctx) const {
        if (!enabled) {
            out = in;
            ctx.xhat.n = 0;
            return;
        }
        out.resize(in.n, in.c, in.h, in.w);
        ctx.xhat.resize(in.n, in.c, in.h, in.w);
        ctx.inv_std.assign(static_cast<size_t>(in.n) * in.c, T(0));
        const int hw = in.plane();
        for (int s = 0; s < in.n; ++s) {
            for (int ch = 0; ch < in.c; ++ch) {
                const T* x = in.channel(s, ch);
                T mean = 0;
                for (int i = 0; i < hw; ++i) mean += x[i];
                mean /= hw;
                T var = 0;
                for (int i = 0; i < hw; ++i) var += (x[i] - mean) * (x[i] - mean);
                var /= hw;
                const T inv = T(1) / std::sqrt(var + T(kEps));
                ctx.inv_std[static_cast<size_t>(s) * in.c + ch] = inv;
                const T gamma = bank.p[static_cast<size_t>(gi)][static_cast<size_t>(ch)];
                const T beta = bank.p[static_cast<size_t>(bi)][static_cast<size_t>(ch)];
                T* xh = ctx.xhat.channel(s, ch);
                T* y = out.channel(s, ch);
                for (int i = 0; i < hw; ++i) {
                    xh[i] = (x[i] - mean) * inv;
                    y[i] = gamma * xh[i] + beta;
                }
            }
        }
    }

    void backward(const ParamBank<T>& bank, ParamBank<T>& grads, const Ctx& ctx,
                  const Tensor4<T>& grad_out, Tensor4<T>& grad_in) const {
        if (!enabled) {
            grad_in = grad_out;
            return;
        }
        const int hw = ctx.xhat.plane();
        grad_in.resize(ctx.xhat.n, ctx.xhat.c, ctx.xhat.h, ctx.xhat.w);
        for (int s = 0; s < ctx.xhat.n; ++s) {
            for (int ch = 0; ch < ctx.xhat.c; ++ch) {
                const T* xh = ctx.xhat.channel(s, ch);
                const T* gy = grad_out.channel(s, ch);
                T* gx = grad_in.channel(s, ch);
                const T gamma = bank.p[static_cast<size_t>(gi)][static_cast<size_t>(ch)];
                const T inv = ctx.inv_std[static_cast<size_t>(s) * ctx.xhat.c + ch];
                T sum_gy = 0, sum_gy_xh = 0;
                for (int i = 0; i < hw; ++i) {
                    sum_gy += gy[i];
                    sum_gy_xh += gy[i] * xh[i];
                }
                grads.p[static_cast<size_t>(gi)][static_cast<size_t>(ch)] += sum_gy_xh;
                grads.p[static_cast<size_t>(bi)][static_cast<size_t>(ch)] += sum_gy;
                const T mean_gy = sum_gy / hw;
                const T mean_gy_xh = sum_gy_xh / hw;
                for (int i = 0; i < hw; ++i)
                    gx[i] = gamma * inv * (gy[i] - mean_gy - xh[i] * mean_gy_xh);
            }
        }
    }
};

// ---------------------------------------------------------------------------
template <typename T>
struct ReLU {
    struct Ctx {
        Tensor4<T> out;
    };
    void forward(const Tensor4<T>& in, Tensor4<T>& out, Ctx& ctx) const {
        out = in;
        for (auto& x : out.v) x = std::max(x, T(0));
        ctx.out = out;
    }
    void backward(const Ctx& ctx, const Tensor4<T>& grad_out, Tensor4<T>& grad_in) const {
        grad_in = grad_out;
        for (size_t i = 0; i < grad_in.v.size(); ++i)
            if (ctx.out.v[i] <= T(0)) grad_in.v[i] = T(0);
    }
};

// ---------------------------------------------------------------------------
template <typename T>
struct MaxPool2d {
    int k = 3, stride = 2, pad = 1;
    struct Ctx {
        Tensor4<T> in_shape;  // only dims used
        std::vector<int> argmax;
        int ho = 0, wo = 0;
    };

    void forward(const Tensor4<T>& in, Tensor4<T>& out, Ctx& ctx) const {
        const int ho = conv_out_dim(in.h, k, stride, pad);
        const int wo = conv_out_dim(in.w, k, stride, pad);
        out.resize(in.n, in.c, ho, wo);
        ctx.in_shape.n = in.n;
        ctx.in_shape.c = in.c;
        ctx.in_shape.h = in.h;
        ctx.in_shape.w = in.w;
        ctx.ho = ho;
        ctx.wo = wo;
        ctx.argmax.assign(out.size(), -1);
        size_t oi = 0;
        for (int s = 0; s < in.n; ++s) {
            for (int ch = 0; ch < in.c; ++ch) {
                const T* src = in.channel(s, ch);
                T* dst = out.channel(s, ch);
                for (int oy = 0; oy < ho; ++oy) {
                    for (int ox = 0; ox < wo; ++ox) {
                        T best = -std::numeric_limits<T>::infinity();
                        int best_i = -1;
                        for (int ky = 0; ky < k; ++ky) {
                            const int iy = oy * stride + ky - pad;
                            if (iy < 0 || iy >= in.h) continue;
                            for (int kx = 0; kx < k; ++kx) {
                                const int ix = ox * stride + kx - pad;
                                if (ix < 0 || ix >= in.w) continue;
                                if (src[iy * in.w + ix] > best) {
                                    best = src[iy * in.w + ix];
                                    best_i = iy * in.w + ix;
                                }
                            }
                        }
                        dst[oy * wo + ox] = best;
                        ctx.argmax[oi++] = best_i;
                    }
                }
            }
        }
    }

    void backward(const Ctx& ctx, const Tensor4<T>& grad_out, Tensor4<T>& grad_in) const {
        grad_in.resize(ctx.in_shape.n, ctx.in_shape.c, ctx.in_shape.h, ctx.in_shape.w);
        size_t oi = 0;
        for (int s = 0; s < grad_out.n; ++s) {
            for (int ch = 0; ch < grad_out.c; ++ch) {
                T* dst = grad_in.channel(s, ch);
                const T* go = grad_out.channel(s, ch);
                for (int i = 0; i < grad_out.plane(); ++i) {
                    const int src = ctx.argmax[oi++];
                    if (src >= 0) dst[src] += go[i];
                }
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Inverted dropout: train-mode expectation equals the eval-mode identity.
template <typename T>
struct Dropout {
    double rate = 0.2;
    struct Ctx {
        std::vector<T> mask;
        bool train = false;
    };

    void forward(const Tensor4<T>& in, Tensor4<T>& out, Ctx& ctx, bool train, Rng& rng) const {
        out = in;
        ctx.train = train && rate > 0.0;
        if (!ctx.train) return;
        ctx.mask.resize(in.size());
        const T keep = T(1) - T(rate);
        for (size_t i = 0; i < in.size(); ++i) {
            ctx.mask[i] = rng.uniform() < rate ? T(0) : T(1) / keep;
            out.v[i] *= ctx.mask[i];
        }
    }
    void backward(const Ctx& ctx, const Tensor4<T>& grad_out, Tensor4<T>& grad_in) const {
        grad_in = grad_out;
        if (!ctx.train) return;
        for (size_t i = 0; i < grad_in.v.size(); ++i) grad_in.v[i] *= ctx.mask[i];
    }
};

// ---------------------------------------------------------------------------
template <typename T>
struct GlobalAvgPool {
    struct Ctx {
        int n = 0, c = 0, h = 0, w = 0;
    };
    void forward(const Tensor4<T>& in, Tensor4<T>& out, Ctx& ctx) const {
        out.resize(in.n, in.c, 1, 1);
        ctx = {in.n, in.c, in.h, in.w};
        const int hw = in.plane();
        for (int s = 0; s < in.n; ++s)
            for (int ch = 0; ch < in.c; ++ch) {
                const T* src = in.channel(s, ch);
                T sum = 0;
                for (int i = 0; i < hw; ++i) sum += src[i];
                out.channel(s, ch)[0] = sum / hw;
            }
    }
    void backward(const Ctx& ctx, const Tensor4<T>& grad_out, Tensor4<T>& grad_in) const {
        grad_in.resize(ctx.n, ctx.c, ctx.h, ctx.w);
        const T inv = T(1) / (ctx.h * ctx.w);
        for (int s = 0; s < ctx.n; ++s)
            for (int ch = 0; ch < ctx.c; ++ch) {
                const T g = grad_out.channel(s, ch)[0] * inv;
                T* dst = grad_in.channel(s, ch);
                for (int i = 0; i < ctx.h * ctx.w; ++i) dst[i] = g;
            }
    }
};

// ---------------------------------------------------------------------------
template <typename T>
struct Linear {
    int in_dim = 0, out_dim = 0;
    int wi = -1, bi = -1;
    struct Ctx {
        Tensor4<T> in;
    };

    void init(ParamBank<T>& bank, Rng& rng) {
        wi = bank.add(static_cast<size_t>(out_dim) * in_dim);
        bi = bank.add(static_cast<size_t>(out_dim));
        const double stddev = std::sqrt(2.0 / in_dim);
        for (auto& w : bank.p[static_cast<size_t>(wi)]) w = static_cast<T>(rng.normal(0.0, stddev));
    }

    void forward(const ParamBank<T>& bank, const Tensor4<T>& in, Tensor4<T>& out, Ctx& ctx) const {
        if (in.c * in.h * in.w != in_dim) throw std::runtime_error("linear: shape mismatch");
        out.resize(in.n, out_dim, 1, 1);
        ctx.in = in;
        Eigen::Map<const MatXR<T>> W(bank.p[static_cast<size_t>(wi)].data(), out_dim, in_dim);
        Eigen::Map<const MatXR<T>> X(in.v.data(), in.n, in_dim);
        Eigen::Map<MatXR<T>> Y(out.v.data(), in.n, out_dim);
        Y.noalias() = X * W.transpose();
        for (int s = 0; s < in.n; ++s)
            for (int o = 0; o < out_dim; ++o) Y(s, o) += bank.p[static_cast<size_t>(bi)][static_cast<size_t>(o)];
    }

    void backward(const ParamBank<T>& bank, ParamBank<T>& grads, const Ctx& ctx,
                  const Tensor4<T>& grad_out, Tensor4<T>& grad_in) const {
        const int n = ctx.in.n;
        grad_in.resize(n, ctx.in.c, ctx.in.h, ctx.in.w);
        Eigen::Map<const MatXR<T>> GO(grad_out.v.data(), n, out_dim);
        Eigen::Map<const MatXR<T>> X(ctx.in.v.data(), n, in_dim);
        Eigen::Map<MatXR<T>> GW(grads.p[static_cast<size_t>(wi)].data(), out_dim, in_dim);
        GW.noalias() += GO.transpose() * X;
        for (int o = 0; o < out_dim; ++o)
            grads.p[static_cast<size_t>(bi)][static_cast<size_t>(o)] += GO.col(o).sum();
        Eigen::Map<const MatXR<T>> W(bank.p[static_cast<size_t>(wi)].data(), out_dim, in_dim);
        Eigen::Map<MatXR<T>> GI(grad_in.v.data(), n, in_dim);
        GI.noalias() = GO * W;
    }
};

}  // namespace vloc::nn
