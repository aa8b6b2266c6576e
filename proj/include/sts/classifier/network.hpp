#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sts/classifier/types.hpp"
#include "sts/nn/dense.hpp"
#include "sts/nn/layers.hpp"
#include "sts/nn/lstm.hpp"
#include "sts/nn/tensor.hpp"
#include "sts/rng.hpp"

namespace sts::clf {

// Conv -> batch-norm -> ReLU unit. Convolutions carry no bias; the batch-norm
// shift plays that role.
template <typename T>
struct ConvUnit {
    nn::Conv3d<T> conv;
    nn::BatchNorm3d<T> bn;

    nn::Tensor5<T> conv_out;  // pre-normalisation, kept for the BN backward
    nn::BnCache<T> bn_cache;
    nn::Tensor5<T> out;       // post-ReLU, doubles as the gradient mask
    const nn::Tensor5<T>* input = nullptr;
    bool trained_forward = false;

    ConvUnit() = default;
    ConvUnit(const std::string& name, int in_ch, int out_ch, nn::Dims3 kernel, nn::Dims3 pad)
        : conv(name, in_ch, out_ch, kernel, {1, 1, 1}, pad, /*bias=*/false), bn(name, out_ch) {}

    const nn::Tensor5<T>& forward(const nn::Tensor5<T>& x, bool train) {
        input = &x;
        trained_forward = train;
        conv_out = conv.forward(x);
        out = bn.forward(conv_out, train, bn_cache, /*fuse_relu=*/true);
        return out;
    }

    nn::Tensor5<T> backward(nn::Tensor5<T> dy) {
        nn::relu_backward_inplace(out, dy);
        nn::Tensor5<T> dbn = trained_forward ? bn.backward(conv_out, bn_cache, dy)
                                             : bn.backward_infer(conv_out, bn_cache, dy);
        return conv.backward(*input, dbn);
    }

    void collect_params(std::vector<nn::Param<T>*>& out_params) {
        conv.collect_params(out_params);
        bn.collect_params(out_params);
    }
    void collect_state(std::vector<nn::Param<T>*>& out_state) { bn.collect_state(out_state); }
};

// One Inception stack: four parallel branches concatenated along channels in
// equal parts (1x1x1 | 1x1x1->3x3x3 | 1x1x1->3x3x3->3x3x3 | 3x3x3 max-pool->1x1x1).
template <typename T>
struct InceptionStack {
    ConvUnit<T> p1;                     // pointwise branch
    ConvUnit<T> p3_reduce, p3_conv;     // single 3x3x3 branch
    ConvUnit<T> p5_reduce, p5_a, p5_b;  // double 3x3x3 branch
    nn::MaxPool3d<T> pool{{3, 3, 3}, {1, 1, 1}, {1, 1, 1}};
    ConvUnit<T> pool_proj;

    nn::Tensor5<T> pool_out;
    std::vector<std::int32_t> pool_argmax;
    nn::Tensor5<T> out;
    const nn::Tensor5<T>* input = nullptr;
    int branch_ch = 0;

    InceptionStack() = default;
    InceptionStack(const std::string& name, int in_ch, int filters) {
        branch_ch = filters / 4;
        const int reduce_ch = std::max(1, branch_ch / 2);
        p1 = ConvUnit<T>(name + ".p1", in_ch, branch_ch, {1, 1, 1}, {0, 0, 0});
        p3_reduce = ConvUnit<T>(name + ".p3.reduce", in_ch, reduce_ch, {1, 1, 1}, {0, 0, 0});
        p3_conv = ConvUnit<T>(name + ".p3.conv", reduce_ch, branch_ch, {3, 3, 3}, {1, 1, 1});
        p5_reduce = ConvUnit<T>(name + ".p5.reduce", in_ch, reduce_ch, {1, 1, 1}, {0, 0, 0});
        p5_a = ConvUnit<T>(name + ".p5.conv_a", reduce_ch, reduce_ch, {3, 3, 3}, {1, 1, 1});
        p5_b = ConvUnit<T>(name + ".p5.conv_b", reduce_ch, branch_ch, {3, 3, 3}, {1, 1, 1});
        pool_proj = ConvUnit<T>(name + ".pool.proj", in_ch, branch_ch, {1, 1, 1}, {0, 0, 0});
    }

    const nn::Tensor5<T>& forward(const nn::Tensor5<T>& x, bool train) {
        input = &x;
        const nn::Tensor5<T>& a = p1.forward(x, train);
        const nn::Tensor5<T>& b = p3_conv.forward(p3_reduce.forward(x, train), train);
        const nn::Tensor5<T>& c = p5_b.forward(p5_a.forward(p5_reduce.forward(x, train), train), train);
        pool_out = pool.forward(x, pool_argmax);
        const nn::Tensor5<T>& d = pool_proj.forward(pool_out, train);

        out = nn::Tensor5<T>(x.n, 4 * branch_ch, x.t, x.h, x.w);
        copy_channels(a, out, 0);
        copy_channels(b, out, branch_ch);
        copy_channels(c, out, 2 * branch_ch);
        copy_channels(d, out, 3 * branch_ch);
        return out;
    }

    nn::Tensor5<T> backward(const nn::Tensor5<T>& dout) {
        nn::Tensor5<T> dx = p1.backward(slice_channels(dout, 0));
        accumulate(dx, p3_reduce.backward(p3_conv.backward(slice_channels(dout, branch_ch))));
        accumulate(dx, p5_reduce.backward(p5_a.backward(p5_b.backward(slice_channels(dout, 2 * branch_ch)))));
        nn::Tensor5<T> dpool = pool_proj.backward(slice_channels(dout, 3 * branch_ch));
        accumulate(dx, pool.backward(*input, dpool, pool_argmax));
        return dx;
    }

    void collect_params(std::vector<nn::Param<T>*>& out_params) {
        p1.collect_params(out_params);
        p3_reduce.collect_params(out_params);
        p3_conv.collect_params(out_params);
        p5_reduce.collect_params(out_params);
        p5_a.collect_params(out_params);
        p5_b.collect_params(out_params);
        pool_proj.collect_params(out_params);
    }
    void collect_state(std::vector<nn::Param<T>*>& out_state) {
        p1.collect_state(out_state);
        p3_reduce.collect_state(out_state);
        p3_conv.collect_state(out_state);
        p5_reduce.collect_state(out_state);
        p5_a.collect_state(out_state);
        p5_b.collect_state(out_state);
        pool_proj.collect_state(out_state);
    }

private:
    static void copy_channels(const nn::Tensor5<T>& src, nn::Tensor5<T>& dst, int c0) {
        for (int n = 0; n < src.n; ++n)
            for (int c = 0; c < src.c; ++c)
                std::copy(src.channel_ptr(n, c), src.channel_ptr(n, c) + src.plane(),
                          dst.channel_ptr(n, c0 + c));
    }
    nn::Tensor5<T> slice_channels(const nn::Tensor5<T>& src, int c0) const {
        nn::Tensor5<T> out_t(src.n, branch_ch, src.t, src.h, src.w);
        for (int n = 0; n < src.n; ++n)
            for (int c = 0; c < branch_ch; ++c)
                std::copy(src.channel_ptr(n, c0 + c), src.channel_ptr(n, c0 + c) + src.plane(),
                          out_t.channel_ptr(n, c));
        return out_t;
    }
    static void accumulate(nn::Tensor5<T>& dst, const nn::Tensor5<T>& src) {
        for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
    }
};

struct TopologyRow {
    std::string name;
    std::string output_shape;
};

// Full classifier: Inception stacks with temporal downsampling after the
// first two, spatial downsampling after every stack, adaptive spatial pooling
// to 2x2, then LSTM over the remaining time axis and a dense softmax head.
template <typename T>
class Network {
public:
    explicit Network(const NetworkConfig& config) : cfg_(config) {
        cfg_.validate();
        int ch = 1, t = cfg_.input_t, h = cfg_.input_h, w = cfg_.input_w;
        topology_.push_back({"input", shape_str(1, ch, t, h, w)});
        for (std::size_t i = 0; i < cfg_.stack_filters.size(); ++i) {
            const std::string name = "stack" + std::to_string(i + 1);
            stacks_.emplace_back(name, ch, cfg_.stack_filters[i]);
            ch = cfg_.stack_filters[i];
            topology_.push_back({name, shape_str(1, ch, t, h, w)});
            if (i < 2) {
                temporal_pools_.emplace_back(nn::Dims3{2, 1, 1}, nn::Dims3{2, 1, 1});
                t = (t - 2) / 2 + 1;
                topology_.push_back({name + ".tpool", shape_str(1, ch, t, h, w)});
            }
            spatial_pools_.emplace_back(nn::Dims3{1, 2, 2}, nn::Dims3{1, 2, 2});
            h = (h - 2) / 2 + 1;
            w = (w - 2) / 2 + 1;
            topology_.push_back({name + ".spool", shape_str(1, ch, t, h, w)});
        }
        adaptive_pool_ = nn::MaxPool3d<T>({1, h / 2, w / 2}, {1, h / 2, w / 2});
        h = 2;
        w = 2;
        topology_.push_back({"adaptive_pool", shape_str(1, ch, t, h, w)});
        feature_dim_ = ch * h * w;
        steps_ = t;
        topology_.push_back({"reshape", "(" + std::to_string(steps_) + "," + std::to_string(feature_dim_) + ")"});
        lstm_ = nn::Lstm<T>("lstm", feature_dim_, cfg_.lstm_units);
        topology_.push_back({"lstm", "(" + std::to_string(cfg_.lstm_units) + ")"});
        head_ = nn::Dense<T>("head", cfg_.lstm_units, cfg_.classes);
        topology_.push_back({"head", "(" + std::to_string(cfg_.classes) + ")"});
    }

    const NetworkConfig& config() const { return cfg_; }
    const std::vector<TopologyRow>& topology() const { return topology_; }
    int feature_dim() const { return feature_dim_; }
    int pseudo_time_steps() const { return steps_; }

    // He-uniform for the convolutional (ReLU) path, Xavier-uniform for the
    // LSTM and dense head; LSTM forget-gate bias starts at 1.
    void init_weights(std::uint64_t seed) {
        Rng rng(seed);
        std::vector<nn::Param<T>*> params = trainable_params();
        for (nn::Param<T>* p : params) {
            if (p->name.find(".scale") != std::string::npos) continue;  // stays 1
            if (p->name.find(".shift") != std::string::npos) continue;  // stays 0
            if (p->name.find(".bias") != std::string::npos) {
                std::fill(p->value.begin(), p->value.end(), T(0));
                continue;
            }
            double bound;
            if (p->name.rfind("lstm", 0) == 0 || p->name.rfind("head", 0) == 0) {
                const double fan_in = static_cast<double>(p->shape.back());
                const double fan_out = static_cast<double>(p->shape.front());
                bound = std::sqrt(6.0 / (fan_in + fan_out));
            } else {
                double fan_in = 1;
                for (std::size_t d = 1; d < p->shape.size(); ++d) fan_in *= static_cast<double>(p->shape[d]);
                bound = std::sqrt(6.0 / fan_in);
            }
            for (auto& v : p->value) v = static_cast<T>(rng.uniform(-bound, bound));
        }
        // forget gate bias = 1
        nn::Param<T>& lb = lstm_.bias();
        for (int u = 0; u < lstm_.units(); ++u) lb.value[lstm_.units() + u] = T(1);
    }

    // x: (batch, 1, T, H, W) -> logits (batch * classes)
    std::vector<T> forward(const nn::Tensor5<T>& x, bool train) {
        if (x.c != 1 || x.t != cfg_.input_t || x.h != cfg_.input_h || x.w != cfg_.input_w) {
            throw ShapeError("network: expected input (N,1," + std::to_string(cfg_.input_t) + "," +
                             std::to_string(cfg_.input_h) + "," + std::to_string(cfg_.input_w) + "), got " +
                             x.shape_str());
        }
        input_ = x;
        const nn::Tensor5<T>* cur = &input_;
        tpool_out_.resize(temporal_pools_.size());
        tpool_argmax_.resize(temporal_pools_.size());
        spool_out_.resize(spatial_pools_.size());
        spool_argmax_.resize(spatial_pools_.size());
        for (std::size_t i = 0; i < stacks_.size(); ++i) {
            cur = &stacks_[i].forward(*cur, train);
            if (i < temporal_pools_.size()) {
                tpool_out_[i] = temporal_pools_[i].forward(*cur, tpool_argmax_[i]);
                cur = &tpool_out_[i];
            }
            spool_out_[i] = spatial_pools_[i].forward(*cur, spool_argmax_[i]);
            cur = &spool_out_[i];
        }
        adaptive_out_ = adaptive_pool_.forward(*cur, adaptive_argmax_);

        // (N, C, steps, 2, 2) -> sequence (steps, N, C*4)
        const nn::Tensor5<T>& f = adaptive_out_;
        seq_ = nn::Seq<T>(steps_, f.n, feature_dim_);
        for (int s = 0; s < steps_; ++s)
            for (int n = 0; n < f.n; ++n) {
                T* dst = seq_.step_ptr(s, n);
                std::size_t k = 0;
                for (int c = 0; c < f.c; ++c)
                    for (int hh = 0; hh < f.h; ++hh)
                        for (int ww = 0; ww < f.w; ++ww)
                            dst[k++] = f.at(n, c, s, hh, ww);
            }

        h_last_ = lstm_.forward(seq_, lstm_cache_);
        logits_ = head_.forward(h_last_, f.n);
        return logits_;
    }

    // dlogits: (batch * classes); accumulates parameter gradients.
    void backward(const std::vector<T>& dlogits) {
        const int batch = input_.n;
        std::vector<T> dh = head_.backward(h_last_, dlogits, batch);
        nn::Seq<T> dseq = lstm_.backward(seq_, lstm_cache_, dh);

        nn::Tensor5<T> dfeat(adaptive_out_.n, adaptive_out_.c, adaptive_out_.t, adaptive_out_.h,
                             adaptive_out_.w);
        for (int s = 0; s < steps_; ++s)
            for (int n = 0; n < batch; ++n) {
                const T* src = dseq.step_ptr(s, n);
                std::size_t k = 0;
                for (int c = 0; c < dfeat.c; ++c)
                    for (int hh = 0; hh < dfeat.h; ++hh)
                        for (int ww = 0; ww < dfeat.w; ++ww)
                            dfeat.at(n, c, s, hh, ww) = src[k++];
            }

        const nn::Tensor5<T>& last_spool = spool_out_.back();
        nn::Tensor5<T> d = adaptive_pool_.backward(last_spool, dfeat, adaptive_argmax_);
        for (std::size_t i = stacks_.size(); i-- > 0;) {
            const nn::Tensor5<T>& spool_in =
                i < temporal_pools_.size() ? tpool_out_[i] : stacks_[i].out;
            d = spatial_pools_[i].backward(spool_in, d, spool_argmax_[i]);
            if (i < temporal_pools_.size()) {
                d = temporal_pools_[i].backward(stacks_[i].out, d, tpool_argmax_[i]);
            }
            d = stacks_[i].backward(d);
        }
    }

    std::vector<nn::Param<T>*> trainable_params() {
        std::vector<nn::Param<T>*> out;
        for (auto& s : stacks_) s.collect_params(out);
        lstm_.collect_params(out);
        head_.collect_params(out);
        return out;
    }

    // Trainable parameters plus batch-norm running statistics; this is the
    // checkpoint manifest order.
    std::vector<nn::Param<T>*> checkpoint_params() {
        std::vector<nn::Param<T>*> out = trainable_params();
        for (auto& s : stacks_) s.collect_state(out);
        return out;
    }

    // Releases activation storage kept between forward and backward.
    void release_activations() {
        input_ = nn::Tensor5<T>();
        tpool_out_.clear();
        spool_out_.clear();
        adaptive_out_ = nn::Tensor5<T>();
        seq_ = nn::Seq<T>();
        for (auto& s : stacks_) {
            s.out = nn::Tensor5<T>();
            s.pool_out = nn::Tensor5<T>();
        }
    }

private:
    static std::string shape_str(int n, int c, int t, int h, int w) {
        return "(N," + std::to_string(c) + "," + std::to_string(t) + "," + std::to_string(h) + "," +
               std::to_string(w) + ")";
    }

    NetworkConfig cfg_;
    std::vector<InceptionStack<T>> stacks_;
    std::vector<nn::MaxPool3d<T>> temporal_pools_;
    std::vector<nn::MaxPool3d<T>> spatial_pools_;
    nn::MaxPool3d<T> adaptive_pool_;
    nn::Lstm<T> lstm_;
    nn::Dense<T> head_;
    std::vector<TopologyRow> topology_;
    int feature_dim_ = 0;
    int steps_ = 0;

    // activations
    nn::Tensor5<T> input_;
    std::vector<nn::Tensor5<T>> tpool_out_, spool_out_;
    std::vector<std::vector<std::int32_t>> tpool_argmax_, spool_argmax_;
    nn::Tensor5<T> adaptive_out_;
    std::vector<std::int32_t> adaptive_argmax_;
    nn::Seq<T> seq_;
    typename nn::Lstm<T>::Cache lstm_cache_;
    std::vector<T> h_last_;
    std::vector<T> logits_;
};

}  // namespace sts::clf
