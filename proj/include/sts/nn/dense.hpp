#pragma once

#include <cmath>
#include <vector>

#include "sts/nn/tensor.hpp"

namespace sts::nn {

template <typename T>
class Dense {
public:
    Dense() = default;
    Dense(std::string name, int input_dim, int output_dim) : in_(input_dim), out_(output_dim) {
        w_.init_shape(name + ".weight",
                      {static_cast<std::size_t>(output_dim), static_cast<std::size_t>(input_dim)});
        b_.init_shape(name + ".bias", {static_cast<std::size_t>(output_dim)});
    }

    int input_dim() const { return in_; }
    int output_dim() const { return out_; }
    Param<T>& weight() { return w_; }
    Param<T>& bias() { return b_; }

    void collect_params(std::vector<Param<T>*>& out) {
        out.push_back(&w_);
        out.push_back(&b_);
    }

    // x: (batch, in) flattened; returns (batch, out)
    std::vector<T> forward(const std::vector<T>& x, int batch) const {
        if (x.size() != static_cast<std::size_t>(batch) * in_) {
            throw ShapeError(w_.name + ": input size mismatch");
        }
        std::vector<T> y(static_cast<std::size_t>(batch) * out_);
        for (int b = 0; b < batch; ++b) {
            const T* xb = x.data() + static_cast<std::size_t>(b) * in_;
            T* yb = y.data() + static_cast<std::size_t>(b) * out_;
            for (int o = 0; o < out_; ++o) {
                T acc = b_.value[o];
                const T* wr = w_.value.data() + static_cast<std::size_t>(o) * in_;
                for (int i = 0; i < in_; ++i) acc += wr[i] * xb[i];
                yb[o] = acc;
            }
        }
        return y;
    }

    std::vector<T> backward(const std::vector<T>& x, const std::vector<T>& dy, int batch) {
        std::vector<T> dx(static_cast<std::size_t>(batch) * in_, T(0));
        for (int b = 0; b < batch; ++b) {
            const T* xb = x.data() + static_cast<std::size_t>(b) * in_;
            const T* db = dy.data() + static_cast<std::size_t>(b) * out_;
            T* dxb = dx.data() + static_cast<std::size_t>(b) * in_;
            for (int o = 0; o < out_; ++o) {
                const T d = db[o];
                b_.grad[o] += d;
                T* gw = w_.grad.data() + static_cast<std::size_t>(o) * in_;
                const T* wr = w_.value.data() + static_cast<std::size_t>(o) * in_;
                for (int i = 0; i < in_; ++i) {
                    gw[i] += d * xb[i];
                    dxb[i] += d * wr[i];
                }
            }
        }
        return dx;
    }

private:
    int in_ = 0, out_ = 0;
    Param<T> w_, b_;
};

// Log-sum-exp stabilised softmax over the last axis of a (batch, classes) block.
template <typename T>
std::vector<T> softmax(const std::vector<T>& logits, int batch, int classes) {
    std::vector<T> probs(logits.size());
    for (int b = 0; b < batch; ++b) {
        const T* lb = logits.data() + static_cast<std::size_t>(b) * classes;
        T* pb = probs.data() + static_cast<std::size_t>(b) * classes;
        T mx = lb[0];
        for (int c = 1; c < classes; ++c) mx = std::max(mx, lb[c]);
        T sum = 0;
        for (int c = 0; c < classes; ++c) {
            pb[c] = std::exp(lb[c] - mx);
            sum += pb[c];
        }
        for (int c = 0; c < classes; ++c) pb[c] /= sum;
    }
    return probs;
}

// Mean cross-entropy of one-hot targets, -log p clamped at p >= 1e-12.
// Gradient w.r.t. logits is (probs - onehot)/batch.
template <typename T>
T cross_entropy(const std::vector<T>& probs, const std::vector<int>& targets, int classes) {
    const int batch = static_cast<int>(targets.size());
    T loss = 0;
    for (int b = 0; b < batch; ++b) {
        T p = probs[static_cast<std::size_t>(b) * classes + targets[b]];
        if (p < T(1e-12)) p = T(1e-12);
        loss -= std::log(p);
    }
    return loss / static_cast<T>(batch);
}

template <typename T>
std::vector<T> cross_entropy_grad(const std::vector<T>& probs, const std::vector<int>& targets, int classes) {
    const int batch = static_cast<int>(targets.size());
    std::vector<T> d(probs);
    for (int b = 0; b < batch; ++b) d[static_cast<std::size_t>(b) * classes + targets[b]] -= T(1);
    const T inv = T(1) / static_cast<T>(batch);
    for (auto& v : d) v *= inv;
    return d;
}

}  // namespace sts::nn
