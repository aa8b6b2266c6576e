#pragma once

#include <cmath>
#include <vector>

#include "sts/nn/tensor.hpp"

namespace sts::nn {

// Single-layer LSTM consumed by the dense head: standard cell (sigmoid input/
// forget/output gates, tanh candidate and output activation), zero initial
// state, returns the last-step hidden vector. Full backpropagation through
// time. Gate order in the stacked parameters is i, f, g, o.
template <typename T>
class Lstm {
public:
    Lstm() = default;
    Lstm(std::string name, int input_dim, int units) : in_(input_dim), units_(units) {
        wx_.init_shape(name + ".wx", {static_cast<std::size_t>(4 * units), static_cast<std::size_t>(input_dim)});
        wh_.init_shape(name + ".wh", {static_cast<std::size_t>(4 * units), static_cast<std::size_t>(units)});
        b_.init_shape(name + ".bias", {static_cast<std::size_t>(4 * units)});
    }

    int units() const { return units_; }
    int input_dim() const { return in_; }
    Param<T>& wx() { return wx_; }
    Param<T>& wh() { return wh_; }
    Param<T>& bias() { return b_; }

    void collect_params(std::vector<Param<T>*>& out) {
        out.push_back(&wx_);
        out.push_back(&wh_);
        out.push_back(&b_);
    }

    struct Cache {
        int steps = 0, batch = 0;
        std::vector<T> gates;   // steps*batch*4u, post-activation (i,f,g,o)
        std::vector<T> cells;   // steps*batch*u
        std::vector<T> hidden;  // steps*batch*u
    };

    // x: (steps, batch, input_dim) -> h_last: (batch, units)
    std::vector<T> forward(const Seq<T>& x, Cache& cache) const {
        if (x.feat != in_) {
            throw ShapeError(wx_.name + ": expected feature dim " + std::to_string(in_) + ", got " +
                             std::to_string(x.feat));
        }
        const int S = x.steps, B = x.batch, U = units_;
        cache.steps = S;
        cache.batch = B;
        cache.gates.assign(static_cast<std::size_t>(S) * B * 4 * U, T(0));
        cache.cells.assign(static_cast<std::size_t>(S) * B * U, T(0));
        cache.hidden.assign(static_cast<std::size_t>(S) * B * U, T(0));

        std::vector<T> h_prev(static_cast<std::size_t>(B) * U, T(0));
        std::vector<T> c_prev(static_cast<std::size_t>(B) * U, T(0));

        for (int s = 0; s < S; ++s) {
            for (int b = 0; b < B; ++b) {
                const T* xt = x.step_ptr(s, b);
                const T* hp = h_prev.data() + static_cast<std::size_t>(b) * U;
                const T* cp = c_prev.data() + static_cast<std::size_t>(b) * U;
                T* gates = cache.gates.data() + (static_cast<std::size_t>(s) * B + b) * 4 * U;
                T* ct = cache.cells.data() + (static_cast<std::size_t>(s) * B + b) * U;
                T* ht = cache.hidden.data() + (static_cast<std::size_t>(s) * B + b) * U;

                for (int g = 0; g < 4 * U; ++g) {
                    T acc = b_.value[g];
                    const T* wxr = wx_.value.data() + static_cast<std::size_t>(g) * in_;
                    for (int i = 0; i < in_; ++i) acc += wxr[i] * xt[i];
                    const T* whr = wh_.value.data() + static_cast<std::size_t>(g) * U;
                    for (int u = 0; u < U; ++u) acc += whr[u] * hp[u];
                    gates[g] = acc;
                }
                for (int u = 0; u < U; ++u) {
                    const T ig = sigmoid(gates[u]);
                    const T fg = sigmoid(gates[U + u]);
                    const T gg = std::tanh(gates[2 * U + u]);
                    const T og = sigmoid(gates[3 * U + u]);
                    gates[u] = ig;
                    gates[U + u] = fg;
                    gates[2 * U + u] = gg;
                    gates[3 * U + u] = og;
                    ct[u] = fg * cp[u] + ig * gg;
                    ht[u] = og * std::tanh(ct[u]);
                }
            }
            std::copy(cache.hidden.begin() + static_cast<std::size_t>(s) * B * U,
                      cache.hidden.begin() + static_cast<std::size_t>(s + 1) * B * U, h_prev.begin());
            std::copy(cache.cells.begin() + static_cast<std::size_t>(s) * B * U,
                      cache.cells.begin() + static_cast<std::size_t>(s + 1) * B * U, c_prev.begin());
        }

        std::vector<T> h_last(static_cast<std::size_t>(B) * U);
        std::copy(cache.hidden.end() - static_cast<std::ptrdiff_t>(B) * U, cache.hidden.end(), h_last.begin());
        return h_last;
    }

    // dh_last: (batch, units) -> dx: (steps, batch, input_dim)
    Seq<T> backward(const Seq<T>& x, const Cache& cache, const std::vector<T>& dh_last) {
        const int S = cache.steps, B = cache.batch, U = units_;
        Seq<T> dx(S, B, in_);
        std::vector<T> dh(dh_last);
        std::vector<T> dc(static_cast<std::size_t>(B) * U, T(0));
        std::vector<T> dgates(static_cast<std::size_t>(B) * 4 * U, T(0));

        for (int s = S - 1; s >= 0; --s) {
            for (int b = 0; b < B; ++b) {
                const T* gates = cache.gates.data() + (static_cast<std::size_t>(s) * B + b) * 4 * U;
                const T* ct = cache.cells.data() + (static_cast<std::size_t>(s) * B + b) * U;
                const T* cp = s > 0 ? cache.cells.data() + (static_cast<std::size_t>(s - 1) * B + b) * U : nullptr;
                T* dg = dgates.data() + static_cast<std::size_t>(b) * 4 * U;
                T* dhb = dh.data() + static_cast<std::size_t>(b) * U;
                T* dcb = dc.data() + static_cast<std::size_t>(b) * U;

                for (int u = 0; u < U; ++u) {
                    const T ig = gates[u], fg = gates[U + u], gg = gates[2 * U + u], og = gates[3 * U + u];
                    const T tc = std::tanh(ct[u]);
                    const T dout = dhb[u];
                    const T dct = dcb[u] + dout * og * (T(1) - tc * tc);
                    const T cprev = cp ? cp[u] : T(0);
                    dg[u] = dct * gg * ig * (T(1) - ig);                  // d pre-i
                    dg[U + u] = dct * cprev * fg * (T(1) - fg);           // d pre-f
                    dg[2 * U + u] = dct * ig * (T(1) - gg * gg);          // d pre-g
                    dg[3 * U + u] = dout * tc * og * (T(1) - og);         // d pre-o
                    dcb[u] = dct * fg;
                }

                const T* xt = x.step_ptr(s, b);
                const T* hp = s > 0 ? cache.hidden.data() + (static_cast<std::size_t>(s - 1) * B + b) * U : nullptr;
                T* dxt = dx.step_ptr(s, b);
                for (int g = 0; g < 4 * U; ++g) {
                    const T d = dg[g];
                    b_.grad[g] += d;
                    T* gwx = wx_.grad.data() + static_cast<std::size_t>(g) * in_;
                    const T* wxr = wx_.value.data() + static_cast<std::size_t>(g) * in_;
                    for (int i = 0; i < in_; ++i) {
                        gwx[i] += d * xt[i];
                        dxt[i] += d * wxr[i];
                    }
                    if (hp) {
                        T* gwh = wh_.grad.data() + static_cast<std::size_t>(g) * U;
                        for (int u = 0; u < U; ++u) gwh[u] += d * hp[u];
                    }
                }

                // dh for the previous step
                for (int u = 0; u < U; ++u) {
                    T acc = 0;
                    for (int g = 0; g < 4 * U; ++g) acc += wh_.value[static_cast<std::size_t>(g) * U + u] * dg[g];
                    dhb[u] = acc;
                }
            }
        }
        return dx;
    }

private:
    static T sigmoid(T v) { return T(1) / (T(1) + std::exp(-v)); }

    int in_ = 0, units_ = 0;
    Param<T> wx_, wh_, b_;
};

}  // namespace sts::nn
