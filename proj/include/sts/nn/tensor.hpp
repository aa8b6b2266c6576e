#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sts/errors.hpp"

namespace sts::nn {

// Allocator that skips value-initialization: big activation buffers are
// always fully written by the kernel that owns them, so zero-filling them on
// construction would double the memory traffic.
template <typename T>
struct UninitAllocator : std::allocator<T> {
    template <typename U>
    struct rebind {
        using other = UninitAllocator<U>;
    };
    template <typename U>
    void construct(U* p) noexcept {
        ::new (static_cast<void*>(p)) U;
    }
    template <typename U, typename... Args>
    void construct(U* p, Args&&... args) {
        ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
    }
};

// Dense 5D activation tensor, row-major (batch, channels, time, height, width).
// 64-bit scalars for tests and oracles, 32-bit for training throughput.
// Storage is default-initialized; every kernel writes its full output (or
// calls zero() when it accumulates).
template <typename T>
struct Tensor5 {
    int n = 0, c = 0, t = 0, h = 0, w = 0;
    std::vector<T, UninitAllocator<T>> data;

    Tensor5() = default;
    Tensor5(int n_, int c_, int t_, int h_, int w_)
        : n(n_), c(c_), t(t_), h(h_), w(w_), data(static_cast<std::size_t>(n_) * c_ * t_ * h_ * w_) {}

    std::size_t numel() const { return data.size(); }
    std::size_t plane() const { return static_cast<std::size_t>(t) * h * w; }  // one channel's volume

    T& at(int in, int ic, int it, int ih, int iw) {
        return data[((((static_cast<std::size_t>(in) * c + ic) * t + it) * h + ih) * w) + iw];
    }
    T at(int in, int ic, int it, int ih, int iw) const {
        return data[((((static_cast<std::size_t>(in) * c + ic) * t + it) * h + ih) * w) + iw];
    }

    T* channel_ptr(int in, int ic) { return data.data() + (static_cast<std::size_t>(in) * c + ic) * plane(); }
    const T* channel_ptr(int in, int ic) const {
        return data.data() + (static_cast<std::size_t>(in) * c + ic) * plane();
    }

    std::string shape_str() const {
        return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(t) + "," +
               std::to_string(h) + "," + std::to_string(w) + ")";
    }

    bool same_shape(const Tensor5& o) const { return n == o.n && c == o.c && t == o.t && h == o.h && w == o.w; }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }
    void zero() { fill(T(0)); }
};

// Named trainable tensor. Layers own their parameters; the network exposes
// flat views for the optimizer, checkpointing and gradient checks.
template <typename T>
struct Param {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<T> value;
    std::vector<T> grad;

    void init_shape(std::string n, std::vector<std::size_t> s) {
        name = std::move(n);
        shape = std::move(s);
        std::size_t total = 1;
        for (auto d : shape) total *= d;
        value.assign(total, T(0));
        grad.assign(total, T(0));
    }
    std::size_t numel() const { return value.size(); }
};

template <typename T>
struct ParamView {
    Param<T>* param = nullptr;
};

// Sequence batch for the recurrent head: (steps, batch, features) row-major.
template <typename T>
struct Seq {
    int steps = 0, batch = 0, feat = 0;
    std::vector<T> data;

    Seq() = default;
    Seq(int s, int b, int f) : steps(s), batch(b), feat(f), data(static_cast<std::size_t>(s) * b * f, T(0)) {}

    T* step_ptr(int s, int b) { return data.data() + (static_cast<std::size_t>(s) * batch + b) * feat; }
    const T* step_ptr(int s, int b) const {
        return data.data() + (static_cast<std::size_t>(s) * batch + b) * feat;
    }
};

}  // namespace sts::nn
