#pragma once

#include <string>

#include "vloc/nn/layers.hpp"

namespace vloc::nn {

// Scaled-down grouped-convolution residual network: stem conv + max pool,
// three stages of bottleneck blocks with grouped 3x3 convolutions, global
// average pooling and two dropout-regularized fully connected layers before
// the task head.
struct NetworkSpec {
    int in_h = 224, in_w = 350;
    int stem_channels = 16;
    int stem_kernel = 7, stem_stride = 2;
    std::vector<int> stage_blocks = {2, 2, 2};
    std::vector<int> stage_width = {16, 32, 64};  // output channels per stage
    int cardinality = 4;
    int bottleneck_div = 2;  // bottleneck width = stage width / div
    int fc_dim = 64;
    double dropout = 0.2;
    int outputs = 2;
    bool use_norm = true;  // per-channel standardization inside the blocks
    uint64_t init_seed = 1;
};

template <typename T>
class Network {
  public:
    struct Block {
        Conv2d<T> reduce, conv, expand, project;
        ChannelNorm<T> n1, n2, n3, np;
        bool has_projection = false;
    };

    struct Ctx {
        typename Conv2d<T>::Ctx stem;
        typename ChannelNorm<T>::Ctx stem_norm;
        typename ReLU<T>::Ctx stem_relu;
        typename MaxPool2d<T>::Ctx pool;
        struct BlockCtx {
            typename Conv2d<T>::Ctx reduce, conv, expand, project;
            typename ChannelNorm<T>::Ctx n1, n2, n3, np;
            typename ReLU<T>::Ctx r1, r2, r_out;
            Tensor4<T> skip_in;
        };
        std::vector<BlockCtx> blocks;
        typename GlobalAvgPool<T>::Ctx gap;
        typename Linear<T>::Ctx fc1, fc2, head;
        typename ReLU<T>::Ctx fr1, fr2;
        typename Dropout<T>::Ctx d1, d2;
    };

    explicit Network(const NetworkSpec& spec) : spec_(spec) {
        Rng rng(spec.init_seed, 0x9e77);
        stem_.cin = 1;
        stem_.cout = spec.stem_channels;
        stem_.k = spec.stem_kernel;
        stem_.stride = spec.stem_stride;
        stem_.pad = spec.stem_kernel / 2;
        stem_.init(bank_, rng);
        stem_norm_.channels = spec.stem_channels;
        stem_norm_.enabled = spec.use_norm;
        stem_norm_.init(bank_);

        int cin = spec.stem_channels;
        for (size_t s = 0; s < spec.stage_blocks.size(); ++s) {
            const int width = spec.stage_width[s];
            const int bott = std::max(spec.cardinality, width / spec.bottleneck_div);
            for (int b = 0; b < spec.stage_blocks[static_cast<size_t>(s)]; ++b) {
                Block blk;
                const int stride = (s > 0 && b == 0) ? 2 : 1;
                blk.reduce = {cin, bott, 1, 1, 0, 1};
                blk.reduce.init(bank_, rng);
                blk.n1.channels = bott;
                blk.n1.enabled = spec.use_norm;
                blk.n1.init(bank_);
                blk.conv = {bott, bott, 3, stride, 1, spec.cardinality};
                blk.conv.init(bank_, rng);
                blk.n2.channels = bott;
                blk.n2.enabled = spec.use_norm;
                blk.n2.init(bank_);
                blk.expand = {bott, width, 1, 1, 0, 1};
                blk.expand.init(bank_, rng);
                blk.n3.channels = width;
                blk.n3.enabled = spec.use_norm;
                blk.n3.init(bank_);
                blk.has_projection = (cin != width) || stride != 1;
                if (blk.has_projection) {
                    blk.project = {cin, width, 1, stride, 0, 1};
                    blk.project.init(bank_, rng);
                    blk.np.channels = width;
                    blk.np.enabled = spec.use_norm;
                    blk.np.init(bank_);
                }
                blocks_.push_back(blk);
                cin = width;
            }
        }

        gap_dim_ = cin;
        fc1_ = {cin, spec.fc_dim};
        fc1_.init(bank_, rng);
        fc2_ = {spec.fc_dim, spec.fc_dim};
        fc2_.init(bank_, rng);
        head_ = {spec.fc_dim, spec.outputs};
        head_.init(bank_, rng);
        drop1_.rate = spec.dropout;
        drop2_.rate = spec.dropout;
    }

    // batch: (N, 1, in_h, in_w). Returns (N, outputs).
    void forward(const Tensor4<T>& batch, Tensor4<T>& out, Ctx& ctx, bool train,
                 Rng& dropout_rng) const {
        if (batch.c != 1 || batch.h != spec_.in_h || batch.w != spec_.in_w)
            throw std::runtime_error("network: input shape mismatch");
        Tensor4<T> x, y;
        stem_.forward(bank_, batch, x, ctx.stem);
        stem_norm_.forward(bank_, x, y, ctx.stem_norm);
        relu_.forward(y, x, ctx.stem_relu);
        pool_.forward(x, y, ctx.pool);
        std::swap(x, y);

        ctx.blocks.resize(blocks_.size());
        for (size_t b = 0; b < blocks_.size(); ++b) {
            const Block& blk = blocks_[b];
            auto& bc = ctx.blocks[b];
            bc.skip_in = x;
            Tensor4<T> t1, t2;
            blk.reduce.forward(bank_, x, t1, bc.reduce);
            blk.n1.forward(bank_, t1, t2, bc.n1);
            relu_.forward(t2, t1, bc.r1);
            blk.conv.forward(bank_, t1, t2, bc.conv);
            blk.n2.forward(bank_, t2, t1, bc.n2);
            relu_.forward(t1, t2, bc.r2);
            blk.expand.forward(bank_, t2, t1, bc.expand);
            Tensor4<T> branch;
            blk.n3.forward(bank_, t1, branch, bc.n3);
            Tensor4<T> skip;
            if (blk.has_projection) {
                Tensor4<T> ps;
                blk.project.forward(bank_, x, ps, bc.project);
                blk.np.forward(bank_, ps, skip, bc.np);
            } else {
                skip = x;
            }
            for (size_t i = 0; i < branch.v.size(); ++i) branch.v[i] += skip.v[i];
            relu_.forward(branch, x, bc.r_out);
        }

        Tensor4<T> g;
        gap_.forward(x, g, ctx.gap);
        Tensor4<T> f1, f1r, f1d, f2, f2r, f2d;
        fc1_.forward(bank_, g, f1, ctx.fc1);
        relu_.forward(f1, f1r, ctx.fr1);
        drop1_.forward(f1r, f1d, ctx.d1, train, dropout_rng);
        fc2_.forward(bank_, f1d, f2, ctx.fc2);
        relu_.forward(f2, f2r, ctx.fr2);
        drop2_.forward(f2r, f2d, ctx.d2, train, dropout_rng);
        head_.forward(bank_, f2d, out, ctx.head);
    }

    // grad_out: (N, outputs). Accumulates into `grads` (zeroed by caller).
    void backward(const Tensor4<T>& grad_out, const Ctx& ctx, ParamBank<T>& grads) const {
        Tensor4<T> g, g2;
        head_.backward(bank_, grads, ctx.head, grad_out, g);
        drop2_.backward(ctx.d2, g, g2);
        relu_.backward(ctx.fr2, g2, g);
        fc2_.backward(bank_, grads, ctx.fc2, g, g2);
        drop1_.backward(ctx.d1, g2, g);
        relu_.backward(ctx.fr1, g, g2);
        fc1_.backward(bank_, grads, ctx.fc1, g2, g);
        Tensor4<T> gx;
        gap_.backward(ctx.gap, g, gx);

        for (size_t bi = blocks_.size(); bi-- > 0;) {
            const Block& blk = blocks_[bi];
            const auto& bc = ctx.blocks[bi];
            Tensor4<T> g_sum;
            relu_.backward(bc.r_out, gx, g_sum);
            // branch path
            Tensor4<T> gb, gt;
            blk.n3.backward(bank_, grads, bc.n3, g_sum, gb);
            blk.expand.backward(bank_, grads, bc.expand, gb, gt);
            relu_.backward(bc.r2, gt, gb);
            blk.n2.backward(bank_, grads, bc.n2, gb, gt);
            blk.conv.backward(bank_, grads, bc.conv, gt, gb);
            relu_.backward(bc.r1, gb, gt);
            blk.n1.backward(bank_, grads, bc.n1, gt, gb);
            Tensor4<T> g_in_branch;
            blk.reduce.backward(bank_, grads, bc.reduce, gb, g_in_branch);
            // skip path
            Tensor4<T> g_in_skip;
            if (blk.has_projection) {
                Tensor4<T> gs;
                blk.np.backward(bank_, grads, bc.np, g_sum, gs);
                blk.project.backward(bank_, grads, bc.project, gs, g_in_skip);
            } else {
                g_in_skip = g_sum;
            }
            gx = g_in_branch;
            for (size_t i = 0; i < gx.v.size(); ++i) gx.v[i] += g_in_skip.v[i];
        }

        Tensor4<T> gp, gs;
        pool_.backward(ctx.pool, gx, gp);
        relu_.backward(ctx.stem_relu, gp, gs);
        Tensor4<T> gn;
        stem_norm_.backward(bank_, grads, ctx.stem_norm, gs, gn);
        Tensor4<T> sink;
        stem_.backward(bank_, grads, ctx.stem, gn, sink);
    }

    ParamBank<T>& bank() { return bank_; }
    const ParamBank<T>& bank() const { return bank_; }
    const NetworkSpec& spec() const { return spec_; }

  private:
    NetworkSpec spec_;
    ParamBank<T> bank_;
    Conv2d<T> stem_;
    ChannelNorm<T> stem_norm_;
    ReLU<T> relu_;
    MaxPool2d<T> pool_;
    std::vector<Block> blocks_;
    GlobalAvgPool<T> gap_;
    Linear<T> fc1_, fc2_, head_;
    Dropout<T> drop1_, drop2_;
    int gap_dim_ = 0;
};

}  // namespace vloc::nn
