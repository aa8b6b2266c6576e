#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "sts/nn/tensor.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

// Layer forward/backward kernels. Parallel loops only ever split over output
// elements (channels / time blocks), so every float accumulation runs in a
// fixed sequential order and results are identical for any thread count.
// Reductions use 8 independent partial sums, which keeps the summation order
// well-defined while letting the compiler vectorize without -ffast-math.

namespace sts::nn {

struct Dims3 {
    int t = 1, h = 1, w = 1;
};

namespace detail {

template <typename T>
inline T lane_fold(const T* acc) {
    return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

template <typename T>
inline T lane_dot(const T* a, const T* b, int n) {
    T acc[8] = {T(0), T(0), T(0), T(0), T(0), T(0), T(0), T(0)};
    int i = 0;
    for (; i + 8 <= n; i += 8)
        for (int l = 0; l < 8; ++l) acc[l] += a[i + l] * b[i + l];
    for (; i < n; ++i) acc[0] += a[i] * b[i];
    return lane_fold(acc);
}

template <typename T>
inline T lane_sum(const T* a, std::size_t n) {
    T acc[8] = {T(0), T(0), T(0), T(0), T(0), T(0), T(0), T(0)};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        for (int l = 0; l < 8; ++l) acc[l] += a[i + l];
    for (; i < n; ++i) acc[0] += a[i];
    return lane_fold(acc);
}

template <typename T>
inline void axpy(T* dst, const T* src, T k, int n) {
    for (int i = 0; i < n; ++i) dst[i] += k * src[i];
}

constexpr int kTimeBlock = 4;  // output frames per cache tile

}  // namespace detail

template <typename T>
class Conv3d {
public:
    Conv3d() = default;
    Conv3d(std::string name, int in_ch, int out_ch, Dims3 kernel, Dims3 stride = {1, 1, 1},
           Dims3 pad = {0, 0, 0}, bool bias = true)
        : in_ch_(in_ch), out_ch_(out_ch), k_(kernel), s_(stride), p_(pad), has_bias_(bias) {
        weight_.init_shape(name + ".weight",
                           {static_cast<std::size_t>(out_ch), static_cast<std::size_t>(in_ch),
                            static_cast<std::size_t>(kernel.t), static_cast<std::size_t>(kernel.h),
                            static_cast<std::size_t>(kernel.w)});
        if (has_bias_) bias_.init_shape(name + ".bias", {static_cast<std::size_t>(out_ch)});
    }

    int out_channels() const { return out_ch_; }
    int in_channels() const { return in_ch_; }
    Param<T>& weight() { return weight_; }
    Param<T>& bias() { return bias_; }
    bool has_bias() const { return has_bias_; }

    void collect_params(std::vector<Param<T>*>& out) {
        out.push_back(&weight_);
        if (has_bias_) out.push_back(&bias_);
    }

    Dims3 out_dims(int t, int h, int w) const {
        Dims3 o;
        o.t = (t + 2 * p_.t - k_.t) / s_.t + 1;
        o.h = (h + 2 * p_.h - k_.h) / s_.h + 1;
        o.w = (w + 2 * p_.w - k_.w) / s_.w + 1;
        return o;
    }

    Tensor5<T> forward(const Tensor5<T>& x) const {
        check_input(x);
        const Dims3 o = out_dims(x.t, x.h, x.w);
        if (o.t < 1 || o.h < 1 || o.w < 1) {
            throw ShapeError(weight_.name + ": output dims collapse for input " + x.shape_str());
        }
        Tensor5<T> y(x.n, out_ch_, o.t, o.h, o.w);

        if (is_pointwise()) {
            forward_pointwise(x, y);
            return y;
        }

        const bool unit_stride = s_.t == 1 && s_.h == 1 && s_.w == 1;
        const int pt = x.t + 2 * p_.t, ph = x.h + 2 * p_.h, pw = x.w + 2 * p_.w;
        const std::size_t pplane = static_cast<std::size_t>(pt) * ph * pw;
        std::vector<T, UninitAllocator<T>> padded(static_cast<std::size_t>(in_ch_) * pplane);
        const int tb_count = (o.t + detail::kTimeBlock - 1) / detail::kTimeBlock;
        const std::size_t oplane = static_cast<std::size_t>(o.h) * o.w;
        const int kvol = k_.t * k_.h * k_.w;

        for (int n = 0; n < x.n; ++n) {
            pad_sample(x, n, padded.data(), pt, ph, pw);
            const T* P = padded.data();
            if (unit_stride) {
#pragma omp parallel for collapse(2) schedule(static)
                for (int co = 0; co < out_ch_; ++co) {
                    for (int tb = 0; tb < tb_count; ++tb) {
                        const int t0 = tb * detail::kTimeBlock;
                        const int t1 = std::min(o.t, t0 + detail::kTimeBlock);
                        T* yc = y.channel_ptr(n, co);
                        const T b = has_bias_ ? bias_.value[co] : T(0);
                        std::fill(yc + t0 * oplane, yc + t1 * oplane, b);
                        for (int ci = 0; ci < in_ch_; ++ci) {
                            const T* pc = P + static_cast<std::size_t>(ci) * pplane;
                            const T* wk = weight_.value.data() +
                                          (static_cast<std::size_t>(co) * in_ch_ + ci) * kvol;
                            for (int kt = 0; kt < k_.t; ++kt)
                                for (int kh = 0; kh < k_.h; ++kh)
                                    for (int kw = 0; kw < k_.w; ++kw) {
                                        const T wv = wk[(kt * k_.h + kh) * k_.w + kw];
                                        for (int to = t0; to < t1; ++to) {
                                            const T* src =
                                                pc + (static_cast<std::size_t>(to + kt) * ph + kh) * pw + kw;
                                            T* dst = yc + to * oplane;
                                            for (int ho = 0; ho < o.h; ++ho)
                                                detail::axpy(dst + static_cast<std::size_t>(ho) * o.w,
                                                             src + static_cast<std::size_t>(ho) * pw, wv, o.w);
                                        }
                                    }
                        }
                    }
                }
            } else {
#pragma omp parallel for schedule(static)
                for (int co = 0; co < out_ch_; ++co) {
                    T* yc = y.channel_ptr(n, co);
                    const T b = has_bias_ ? bias_.value[co] : T(0);
                    std::fill(yc, yc + y.plane(), b);
                    for (int ci = 0; ci < in_ch_; ++ci) {
                        const T* pc = P + static_cast<std::size_t>(ci) * pplane;
                        const T* wk =
                            weight_.value.data() + (static_cast<std::size_t>(co) * in_ch_ + ci) * kvol;
                        for (int kt = 0; kt < k_.t; ++kt)
                            for (int kh = 0; kh < k_.h; ++kh)
                                for (int kw = 0; kw < k_.w; ++kw) {
                                    const T wv = wk[(kt * k_.h + kh) * k_.w + kw];
                                    for (int to = 0; to < o.t; ++to)
                                        for (int ho = 0; ho < o.h; ++ho) {
                                            const T* src = pc +
                                                           (static_cast<std::size_t>(to * s_.t + kt) * ph +
                                                            ho * s_.h + kh) *
                                                               pw +
                                                           kw;
                                            T* dst = yc + (static_cast<std::size_t>(to) * o.h + ho) * o.w;
                                            for (int wo = 0; wo < o.w; ++wo) dst[wo] += wv * src[wo * s_.w];
                                        }
                                }
                    }
                }
            }
        }
        return y;
    }

    // Accumulates weight/bias gradients, returns input gradient.
    Tensor5<T> backward(const Tensor5<T>& x, const Tensor5<T>& dy) {
        check_input(x);
        Tensor5<T> dx(x.n, x.c, x.t, x.h, x.w);
        const Dims3 o{dy.t, dy.h, dy.w};
        const bool unit_stride = s_.t == 1 && s_.h == 1 && s_.w == 1;

        if (has_bias_) {
#pragma omp parallel for schedule(static)
            for (int co = 0; co < out_ch_; ++co) {
                T acc = 0;
                for (int n = 0; n < dy.n; ++n) acc += detail::lane_sum(dy.channel_ptr(n, co), dy.plane());
                bias_.grad[co] += acc;
            }
        }

        if (is_pointwise()) {
            backward_pointwise(x, dy, dx);
            return dx;
        }

        const int pt = x.t + 2 * p_.t, ph = x.h + 2 * p_.h, pw = x.w + 2 * p_.w;
        const std::size_t pplane = static_cast<std::size_t>(pt) * ph * pw;
        const std::size_t oplane = static_cast<std::size_t>(o.h) * o.w;
        const int kvol = k_.t * k_.h * k_.w;
        const int tb_count = (o.t + detail::kTimeBlock - 1) / detail::kTimeBlock;
        std::vector<T, UninitAllocator<T>> padded(static_cast<std::size_t>(in_ch_) * pplane);
        std::vector<T, UninitAllocator<T>> dpadded(padded.size());

        for (int n = 0; n < x.n; ++n) {
            pad_sample(x, n, padded.data(), pt, ph, pw);
            if (!unit_stride) {
                backward_strided(x, dy, dx, n, padded, dpadded, pt, ph, pw);
                continue;
            }

            // dW: correlate dy with the padded input, cache-tiled over time.
#pragma omp parallel for schedule(static)
            for (int co = 0; co < out_ch_; ++co) {
                const T* dc = dy.channel_ptr(n, co);
                std::vector<T> local(static_cast<std::size_t>(in_ch_) * kvol, T(0));
                for (int tb = 0; tb < tb_count; ++tb) {
                    const int t0 = tb * detail::kTimeBlock;
                    const int t1 = std::min(o.t, t0 + detail::kTimeBlock);
                    for (int ci = 0; ci < in_ch_; ++ci) {
                        const T* pc = padded.data() + static_cast<std::size_t>(ci) * pplane;
                        T* lw = local.data() + static_cast<std::size_t>(ci) * kvol;
                        for (int kt = 0; kt < k_.t; ++kt)
                            for (int kh = 0; kh < k_.h; ++kh)
                                for (int kw = 0; kw < k_.w; ++kw) {
                                    T acc = 0;
                                    for (int to = t0; to < t1; ++to) {
                                        const T* src =
                                            pc + (static_cast<std::size_t>(to + kt) * ph + kh) * pw + kw;
                                        const T* dd = dc + static_cast<std::size_t>(to) * oplane;
                                        for (int ho = 0; ho < o.h; ++ho)
                                            acc += detail::lane_dot(dd + static_cast<std::size_t>(ho) * o.w,
                                                                    src + static_cast<std::size_t>(ho) * pw,
                                                                    o.w);
                                    }
                                    lw[(kt * k_.h + kh) * k_.w + kw] += acc;
                                }
                    }
                }
                T* gw = weight_.grad.data() + static_cast<std::size_t>(co) * in_ch_ * kvol;
                for (std::size_t i = 0; i < local.size(); ++i) gw[i] += local[i];
            }

            // dX: scatter dy through the kernel into a padded buffer, then crop.
            std::fill(dpadded.begin(), dpadded.end(), T(0));
#pragma omp parallel for schedule(static)
            for (int ci = 0; ci < in_ch_; ++ci) {
                T* dpc = dpadded.data() + static_cast<std::size_t>(ci) * pplane;
                for (int tb = 0; tb < tb_count; ++tb) {
                    const int t0 = tb * detail::kTimeBlock;
                    const int t1 = std::min(o.t, t0 + detail::kTimeBlock);
                    for (int co = 0; co < out_ch_; ++co) {
                        const T* dc = dy.channel_ptr(n, co);
                        const T* wk =
                            weight_.value.data() + (static_cast<std::size_t>(co) * in_ch_ + ci) * kvol;
                        for (int kt = 0; kt < k_.t; ++kt)
                            for (int kh = 0; kh < k_.h; ++kh)
                                for (int kw = 0; kw < k_.w; ++kw) {
                                    const T wv = wk[(kt * k_.h + kh) * k_.w + kw];
                                    for (int to = t0; to < t1; ++to) {
                                        T* dst = dpc + (static_cast<std::size_t>(to + kt) * ph + kh) * pw + kw;
                                        const T* dd = dc + static_cast<std::size_t>(to) * oplane;
                                        for (int ho = 0; ho < o.h; ++ho)
                                            detail::axpy(dst + static_cast<std::size_t>(ho) * pw,
                                                         dd + static_cast<std::size_t>(ho) * o.w, wv, o.w);
                                    }
                                }
                    }
                }
                // crop into dx
                for (int t = 0; t < x.t; ++t)
                    for (int hh = 0; hh < x.h; ++hh) {
                        const T* src = dpc + (static_cast<std::size_t>(t + p_.t) * ph + hh + p_.h) * pw + p_.w;
                        T* dst = dx.channel_ptr(n, ci) + (static_cast<std::size_t>(t) * x.h + hh) * x.w;
                        for (int ww = 0; ww < x.w; ++ww) dst[ww] = src[ww];
                    }
            }
        }
        return dx;
    }

private:
    bool is_pointwise() const {
        return k_.t == 1 && k_.h == 1 && k_.w == 1 && s_.t == 1 && s_.h == 1 && s_.w == 1 && p_.t == 0 &&
               p_.h == 0 && p_.w == 0;
    }

    void check_input(const Tensor5<T>& x) const {
        if (x.c != in_ch_) {
            throw ShapeError(weight_.name + ": expected " + std::to_string(in_ch_) + " input channels, got " +
                             x.shape_str());
        }
    }

    void pad_sample(const Tensor5<T>& x, int n, T* padded, int pt, int ph, int pw) const {
        const std::size_t pplane = static_cast<std::size_t>(pt) * ph * pw;
        if (p_.t == 0 && p_.h == 0 && p_.w == 0) {
            std::copy(x.channel_ptr(n, 0), x.channel_ptr(n, 0) + static_cast<std::size_t>(x.c) * x.plane(),
                      padded);
            return;
        }
        std::fill(padded, padded + static_cast<std::size_t>(x.c) * pplane, T(0));
        for (int ci = 0; ci < x.c; ++ci) {
            const T* src = x.channel_ptr(n, ci);
            T* dst = padded + static_cast<std::size_t>(ci) * pplane;
            for (int t = 0; t < x.t; ++t)
                for (int hh = 0; hh < x.h; ++hh) {
                    std::copy(src + (static_cast<std::size_t>(t) * x.h + hh) * x.w,
                              src + (static_cast<std::size_t>(t) * x.h + hh) * x.w + x.w,
                              dst + (static_cast<std::size_t>(t + p_.t) * ph + hh + p_.h) * pw + p_.w);
                }
        }
    }

    // 1x1x1 stride-1: a channel-mixing matrix applied over the whole volume.
    void forward_pointwise(const Tensor5<T>& x, Tensor5<T>& y) const {
        const std::size_t plane = x.plane();
        constexpr std::size_t kBlock = 8192;
        for (int n = 0; n < x.n; ++n) {
#pragma omp parallel for schedule(static)
            for (int co = 0; co < out_ch_; ++co) {
                T* yc = y.channel_ptr(n, co);
                const T b = has_bias_ ? bias_.value[co] : T(0);
                for (std::size_t p0 = 0; p0 < plane; p0 += kBlock) {
                    const int len = static_cast<int>(std::min(plane, p0 + kBlock) - p0);
                    std::fill(yc + p0, yc + p0 + len, b);
                    for (int ci = 0; ci < in_ch_; ++ci) {
                        const T wv = weight_.value[static_cast<std::size_t>(co) * in_ch_ + ci];
                        detail::axpy(yc + p0, x.channel_ptr(n, ci) + p0, wv, len);
                    }
                }
            }
        }
    }

    void backward_pointwise(const Tensor5<T>& x, const Tensor5<T>& dy, Tensor5<T>& dx) {
        const int plane = static_cast<int>(x.plane());
        for (int n = 0; n < x.n; ++n) {
#pragma omp parallel for schedule(static)
            for (int co = 0; co < out_ch_; ++co) {
                const T* dc = dy.channel_ptr(n, co);
                for (int ci = 0; ci < in_ch_; ++ci) {
                    weight_.grad[static_cast<std::size_t>(co) * in_ch_ + ci] +=
                        detail::lane_dot(dc, x.channel_ptr(n, ci), plane);
                }
            }
#pragma omp parallel for schedule(static)
            for (int ci = 0; ci < in_ch_; ++ci) {
                T* dxc = dx.channel_ptr(n, ci);
                std::fill(dxc, dxc + plane, T(0));
                for (int co = 0; co < out_ch_; ++co) {
                    const T wv = weight_.value[static_cast<std::size_t>(co) * in_ch_ + ci];
                    detail::axpy(dxc, dy.channel_ptr(n, co), wv, plane);
                }
            }
        }
    }

    // Reference-style path for strided configurations (tests only; the
    // production network is stride-1 everywhere).
    void backward_strided(const Tensor5<T>& x, const Tensor5<T>& dy, Tensor5<T>& dx, int n,
                          std::vector<T, UninitAllocator<T>>& padded,
                          std::vector<T, UninitAllocator<T>>& dpadded, int pt, int ph, int pw) {
        const std::size_t pplane = static_cast<std::size_t>(pt) * ph * pw;
        const Dims3 o{dy.t, dy.h, dy.w};
        const int kvol = k_.t * k_.h * k_.w;
#pragma omp parallel for schedule(static)
        for (int co = 0; co < out_ch_; ++co) {
            const T* dc = dy.channel_ptr(n, co);
            for (int ci = 0; ci < in_ch_; ++ci) {
                const T* pc = padded.data() + static_cast<std::size_t>(ci) * pplane;
                T* gw = weight_.grad.data() + (static_cast<std::size_t>(co) * in_ch_ + ci) * kvol;
                for (int kt = 0; kt < k_.t; ++kt)
                    for (int kh = 0; kh < k_.h; ++kh)
                        for (int kw = 0; kw < k_.w; ++kw) {
                            T acc = 0;
                            for (int to = 0; to < o.t; ++to)
                                for (int ho = 0; ho < o.h; ++ho) {
                                    const T* src = pc +
                                                   (static_cast<std::size_t>(to * s_.t + kt) * ph +
                                                    ho * s_.h + kh) *
                                                       pw +
                                                   kw;
                                    const T* dd = dc + (static_cast<std::size_t>(to) * o.h + ho) * o.w;
                                    for (int wo = 0; wo < o.w; ++wo) acc += dd[wo] * src[wo * s_.w];
                                }
                            gw[(kt * k_.h + kh) * k_.w + kw] += acc;
                        }
            }
        }
        std::fill(dpadded.begin(), dpadded.end(), T(0));
#pragma omp parallel for schedule(static)
        for (int ci = 0; ci < in_ch_; ++ci) {
            T* dpc = dpadded.data() + static_cast<std::size_t>(ci) * pplane;
            for (int co = 0; co < out_ch_; ++co) {
                const T* dc = dy.channel_ptr(n, co);
                const T* wk = weight_.value.data() + (static_cast<std::size_t>(co) * in_ch_ + ci) * kvol;
                for (int kt = 0; kt < k_.t; ++kt)
                    for (int kh = 0; kh < k_.h; ++kh)
                        for (int kw = 0; kw < k_.w; ++kw) {
                            const T wv = wk[(kt * k_.h + kh) * k_.w + kw];
                            for (int to = 0; to < o.t; ++to)
                                for (int ho = 0; ho < o.h; ++ho) {
                                    T* dst = dpc +
                                             (static_cast<std::size_t>(to * s_.t + kt) * ph + ho * s_.h + kh) *
                                                 pw +
                                             kw;
                                    const T* dd = dc + (static_cast<std::size_t>(to) * o.h + ho) * o.w;
                                    for (int wo = 0; wo < o.w; ++wo) dst[wo * s_.w] += wv * dd[wo];
                                }
                        }
            }
            for (int t = 0; t < x.t; ++t)
                for (int hh = 0; hh < x.h; ++hh) {
                    const T* src = dpc + (static_cast<std::size_t>(t + p_.t) * ph + hh + p_.h) * pw + p_.w;
                    T* dst = dx.channel_ptr(n, ci) + (static_cast<std::size_t>(t) * x.h + hh) * x.w;
                    for (int ww = 0; ww < x.w; ++ww) dst[ww] = src[ww];
                }
        }
    }

    int in_ch_ = 0, out_ch_ = 0;
    Dims3 k_, s_, p_;
    bool has_bias_ = true;
    Param<T> weight_;
    Param<T> bias_;
};

template <typename T>
struct BnCache {
    std::vector<T> mean;
    std::vector<T> inv_std;  // 1/sqrt(var + eps)
};

template <typename T>
class BatchNorm3d {
public:
    BatchNorm3d() = default;
    BatchNorm3d(std::string name, int channels, T eps = T(1e-7), T momentum = T(0.1))
        : channels_(channels), eps_(eps), momentum_(momentum) {
        scale_.init_shape(name + ".scale", {static_cast<std::size_t>(channels)});
        shift_.init_shape(name + ".shift", {static_cast<std::size_t>(channels)});
        std::fill(scale_.value.begin(), scale_.value.end(), T(1));
        running_mean_.init_shape(name + ".running_mean", {static_cast<std::size_t>(channels)});
        running_var_.init_shape(name + ".running_var", {static_cast<std::size_t>(channels)});
        std::fill(running_var_.value.begin(), running_var_.value.end(), T(1));
    }

    Param<T>& scale() { return scale_; }
    Param<T>& shift() { return shift_; }
    std::vector<T>& running_mean() { return running_mean_.value; }
    std::vector<T>& running_var() { return running_var_.value; }
    T epsilon() const { return eps_; }

    void collect_params(std::vector<Param<T>*>& out) {
        out.push_back(&scale_);
        out.push_back(&shift_);
    }

    // Running statistics: saved with checkpoints, never touched by the optimizer.
    void collect_state(std::vector<Param<T>*>& out) {
        out.push_back(&running_mean_);
        out.push_back(&running_var_);
    }

    // fuse_relu applies max(0, .) in the same pass as the normalisation.
    Tensor5<T> forward(const Tensor5<T>& x, bool train, BnCache<T>& cache, bool fuse_relu = false) {
        if (x.c != channels_) {
            throw ShapeError(scale_.name + ": expected " + std::to_string(channels_) + " channels, got " +
                             x.shape_str());
        }
        Tensor5<T> y(x.n, x.c, x.t, x.h, x.w);
        const std::size_t plane = x.plane();
        const T count = static_cast<T>(static_cast<double>(x.n) * static_cast<double>(plane));
        cache.mean.assign(channels_, T(0));
        cache.inv_std.assign(channels_, T(0));

#pragma omp parallel for schedule(static)
        for (int c = 0; c < channels_; ++c) {
            T mean, inv;
            if (train) {
                T sum = 0;
                for (int n = 0; n < x.n; ++n) sum += detail::lane_sum(x.channel_ptr(n, c), plane);
                mean = sum / count;
                T var_sum = 0;
                for (int n = 0; n < x.n; ++n) {
                    const T* xc = x.channel_ptr(n, c);
                    T acc[8] = {T(0), T(0), T(0), T(0), T(0), T(0), T(0), T(0)};
                    std::size_t i = 0;
                    for (; i + 8 <= plane; i += 8)
                        for (int l = 0; l < 8; ++l) {
                            const T d = xc[i + l] - mean;
                            acc[l] += d * d;
                        }
                    for (; i < plane; ++i) {
                        const T d = xc[i] - mean;
                        acc[0] += d * d;
                    }
                    var_sum += detail::lane_fold(acc);
                }
                const T var = var_sum / count;
                running_mean_.value[c] = (T(1) - momentum_) * running_mean_.value[c] + momentum_ * mean;
                running_var_.value[c] = (T(1) - momentum_) * running_var_.value[c] + momentum_ * var;
                inv = T(1) / std::sqrt(var + eps_);
            } else {
                mean = running_mean_.value[c];
                inv = T(1) / std::sqrt(running_var_.value[c] + eps_);
            }
            cache.mean[c] = mean;
            cache.inv_std[c] = inv;
            const T g = scale_.value[c], b = shift_.value[c];
            const T a = g * inv;
            const T off = b - a * mean;
            for (int n = 0; n < x.n; ++n) {
                const T* xc = x.channel_ptr(n, c);
                T* yc = y.channel_ptr(n, c);
                if (fuse_relu) {
                    for (std::size_t i = 0; i < plane; ++i) {
                        const T v = a * xc[i] + off;
                        yc[i] = v > T(0) ? v : T(0);
                    }
                } else {
                    for (std::size_t i = 0; i < plane; ++i) yc[i] = a * xc[i] + off;
                }
            }
        }
        return y;
    }

    // Training-mode backward; xhat is recomputed from x and the cached stats.
    Tensor5<T> backward(const Tensor5<T>& x, const BnCache<T>& cache, const Tensor5<T>& dy) {
        Tensor5<T> dx(x.n, x.c, x.t, x.h, x.w);
        const std::size_t plane = x.plane();
        const T count = static_cast<T>(static_cast<double>(x.n) * static_cast<double>(plane));

#pragma omp parallel for schedule(static)
        for (int c = 0; c < channels_; ++c) {
            const T mean = cache.mean[c], inv = cache.inv_std[c], g = scale_.value[c];
            T sum_dy = 0, sum_dy_xm = 0;
            for (int n = 0; n < x.n; ++n) {
                const T* xc = x.channel_ptr(n, c);
                const T* dc = dy.channel_ptr(n, c);
                T a0[8] = {T(0), T(0), T(0), T(0), T(0), T(0), T(0), T(0)};
                T a1[8] = {T(0), T(0), T(0), T(0), T(0), T(0), T(0), T(0)};
                std::size_t i = 0;
                for (; i + 8 <= plane; i += 8)
                    for (int l = 0; l < 8; ++l) {
                        a0[l] += dc[i + l];
                        a1[l] += dc[i + l] * (xc[i + l] - mean);
                    }
                for (; i < plane; ++i) {
                    a0[0] += dc[i];
                    a1[0] += dc[i] * (xc[i] - mean);
                }
                sum_dy += detail::lane_fold(a0);
                sum_dy_xm += detail::lane_fold(a1);
            }
            const T sum_dy_xhat = sum_dy_xm * inv;
            shift_.grad[c] += sum_dy;
            scale_.grad[c] += sum_dy_xhat;
            const T mean_dy = sum_dy / count;
            const T mean_dy_xhat = sum_dy_xhat / count;
            for (int n = 0; n < x.n; ++n) {
                const T* xc = x.channel_ptr(n, c);
                const T* dc = dy.channel_ptr(n, c);
                T* dxc = dx.channel_ptr(n, c);
                for (std::size_t i = 0; i < plane; ++i) {
                    const T xhat = (xc[i] - mean) * inv;
                    dxc[i] = g * inv * (dc[i] - mean_dy - xhat * mean_dy_xhat);
                }
            }
        }
        return dx;
    }

    // Inference-mode backward (running statistics treated as constants).
    Tensor5<T> backward_infer(const Tensor5<T>& x, const BnCache<T>& cache, const Tensor5<T>& dy) {
        Tensor5<T> dx(x.n, x.c, x.t, x.h, x.w);
        const std::size_t plane = x.plane();
#pragma omp parallel for schedule(static)
        for (int c = 0; c < channels_; ++c) {
            const T inv = cache.inv_std[c], g = scale_.value[c], mean = cache.mean[c];
            T sum_dy = 0, sum_dy_xhat = 0;
            for (int n = 0; n < x.n; ++n) {
                const T* dc = dy.channel_ptr(n, c);
                const T* xc = x.channel_ptr(n, c);
                T* dxc = dx.channel_ptr(n, c);
                for (std::size_t i = 0; i < plane; ++i) {
                    sum_dy += dc[i];
                    sum_dy_xhat += dc[i] * (xc[i] - mean) * inv;
                    dxc[i] = g * inv * dc[i];
                }
            }
            shift_.grad[c] += sum_dy;
            scale_.grad[c] += sum_dy_xhat;
        }
        return dx;
    }

private:
    int channels_ = 0;
    T eps_ = T(1e-7);
    T momentum_ = T(0.1);
    Param<T> scale_, shift_;
    Param<T> running_mean_, running_var_;
};

// Elementwise max(0, x). In-place; gradient mask comes from the output.
template <typename T>
inline void relu_inplace(Tensor5<T>& x) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(x.data.size()); ++i) {
        if (x.data[i] < T(0)) x.data[i] = T(0);
    }
}

template <typename T>
inline void relu_backward_inplace(const Tensor5<T>& y, Tensor5<T>& dy) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(y.data.size()); ++i) {
        if (y.data[i] <= T(0)) dy.data[i] = T(0);
    }
}

template <typename T>
class MaxPool3d {
public:
    MaxPool3d() = default;
    MaxPool3d(Dims3 window, Dims3 stride, Dims3 pad = {0, 0, 0}) : k_(window), s_(stride), p_(pad) {}

    Dims3 out_dims(int t, int h, int w) const {
        Dims3 o;
        o.t = (t + 2 * p_.t - k_.t) / s_.t + 1;
        o.h = (h + 2 * p_.h - k_.h) / s_.h + 1;
        o.w = (w + 2 * p_.w - k_.w) / s_.w + 1;
        return o;
    }

    // argmax stores, per output element, the winning linear offset within the
    // sample's (c,t,h,w) block; ties go to the first index in scan order.
    Tensor5<T> forward(const Tensor5<T>& x, std::vector<std::int32_t>& argmax) const {
        if (k_.t > x.t + 2 * p_.t || k_.h > x.h + 2 * p_.h || k_.w > x.w + 2 * p_.w) {
            throw ShapeError("maxpool: window exceeds padded input " + x.shape_str());
        }
        const Dims3 o = out_dims(x.t, x.h, x.w);
        Tensor5<T> y(x.n, x.c, o.t, o.h, o.w);
        argmax.assign(y.numel(), -1);
        const bool disjoint = p_.t == 0 && p_.h == 0 && p_.w == 0 && s_.t == k_.t && s_.h == k_.h &&
                              s_.w == k_.w && o.t * k_.t <= x.t && o.h * k_.h <= x.h && o.w * k_.w <= x.w;

        for (int n = 0; n < x.n; ++n) {
#pragma omp parallel for schedule(static)
            for (int c = 0; c < x.c; ++c) {
                const T* xc = x.channel_ptr(n, c);
                T* yc = y.channel_ptr(n, c);
                std::int32_t* am = argmax.data() + (static_cast<std::size_t>(n) * x.c + c) * y.plane();
                const std::int32_t cbase = static_cast<std::int32_t>(c * x.plane());
                if (disjoint) {
                    forward_disjoint(x, o, xc, yc, am, cbase);
                    continue;
                }
                std::size_t oi = 0;
                for (int to = 0; to < o.t; ++to)
                    for (int ho = 0; ho < o.h; ++ho) {
                        const int t_lo = to * s_.t - p_.t, h_lo = ho * s_.h - p_.h;
                        const bool th_in =
                            t_lo >= 0 && t_lo + k_.t <= x.t && h_lo >= 0 && h_lo + k_.h <= x.h;
                        for (int wo = 0; wo < o.w; ++wo, ++oi) {
                            const int w_lo = wo * s_.w - p_.w;
                            T best = -std::numeric_limits<T>::infinity();
                            std::int32_t best_idx = -1;
                            if (th_in && w_lo >= 0 && w_lo + k_.w <= x.w) {
                                // interior: window scan without bounds checks
                                for (int kt = 0; kt < k_.t; ++kt)
                                    for (int kh = 0; kh < k_.h; ++kh) {
                                        const std::int32_t row0 = static_cast<std::int32_t>(
                                            (static_cast<std::size_t>(t_lo + kt) * x.h + h_lo + kh) * x.w + w_lo);
                                        const T* row = xc + row0;
                                        for (int kw = 0; kw < k_.w; ++kw) {
                                            const bool take = row[kw] > best;
                                            best = take ? row[kw] : best;
                                            best_idx = take ? row0 + kw : best_idx;
                                        }
                                    }
                            } else {
                                for (int kt = 0; kt < k_.t; ++kt) {
                                    const int t = t_lo + kt;
                                    if (t < 0 || t >= x.t) continue;
                                    for (int kh = 0; kh < k_.h; ++kh) {
                                        const int hh = h_lo + kh;
                                        if (hh < 0 || hh >= x.h) continue;
                                        for (int kw = 0; kw < k_.w; ++kw) {
                                            const int ww = w_lo + kw;
                                            if (ww < 0 || ww >= x.w) continue;
                                            const std::int32_t idx = static_cast<std::int32_t>(
                                                (static_cast<std::size_t>(t) * x.h + hh) * x.w + ww);
                                            if (xc[idx] > best) {
                                                best = xc[idx];
                                                best_idx = idx;
                                            }
                                        }
                                    }
                                }
                            }
                            yc[oi] = best;
                            am[oi] = best_idx >= 0 ? best_idx + cbase : -1;
                        }
                    }
            }
        }
        return y;
    }

    Tensor5<T> backward(const Tensor5<T>& x, const Tensor5<T>& dy,
                        const std::vector<std::int32_t>& argmax) const {
        Tensor5<T> dx(x.n, x.c, x.t, x.h, x.w);
        dx.zero();
        for (int n = 0; n < x.n; ++n) {
#pragma omp parallel for schedule(static)
            for (int c = 0; c < x.c; ++c) {
                const T* dc = dy.channel_ptr(n, c);
                const std::int32_t* am =
                    argmax.data() + (static_cast<std::size_t>(n) * x.c + c) * dy.plane();
                T* dxs = dx.data.data() + static_cast<std::size_t>(n) * x.c * x.plane();
                for (std::size_t i = 0; i < dy.plane(); ++i) {
                    if (am[i] >= 0) dxs[am[i]] += dc[i];
                }
            }
        }
        return dx;
    }

private:
    // stride == window, no padding: branchless scan over non-overlapping windows
    void forward_disjoint(const Tensor5<T>& x, const Dims3& o, const T* xc, T* yc, std::int32_t* am,
                          std::int32_t cbase) const {
        std::size_t oi = 0;
        for (int to = 0; to < o.t; ++to)
            for (int ho = 0; ho < o.h; ++ho) {
                const int t_lo = to * k_.t, h_lo = ho * k_.h;
                if (k_.w == 1) {
                    // windows advance with the output index; vector-friendly
                    const T* base = xc + (static_cast<std::size_t>(t_lo) * x.h + h_lo) * x.w;
                    const std::int32_t idx0 = static_cast<std::int32_t>(
                        (static_cast<std::size_t>(t_lo) * x.h + h_lo) * x.w);
                    for (int wo = 0; wo < o.w; ++wo) {
                        T best = base[wo];
                        std::int32_t best_idx = idx0 + wo;
                        for (int kt = 0; kt < k_.t; ++kt)
                            for (int kh = 0; kh < k_.h; ++kh) {
                                if (kt == 0 && kh == 0) continue;
                                const std::int32_t off = static_cast<std::int32_t>(
                                    (static_cast<std::size_t>(kt) * x.h + kh) * x.w);
                                const T v = base[off + wo];
                                const bool take = v > best;
                                best = take ? v : best;
                                best_idx = take ? idx0 + off + wo : best_idx;
                            }
                        yc[oi] = best;
                        am[oi] = best_idx + cbase;
                        ++oi;
                    }
                } else {
                    for (int wo = 0; wo < o.w; ++wo, ++oi) {
                        const int w_lo = wo * k_.w;
                        T best = -std::numeric_limits<T>::infinity();
                        std::int32_t best_idx = -1;
                        for (int kt = 0; kt < k_.t; ++kt)
                            for (int kh = 0; kh < k_.h; ++kh) {
                                const std::int32_t row0 = static_cast<std::int32_t>(
                                    (static_cast<std::size_t>(t_lo + kt) * x.h + h_lo + kh) * x.w + w_lo);
                                const T* row = xc + row0;
                                for (int kw = 0; kw < k_.w; ++kw) {
                                    const bool take = row[kw] > best;
                                    best = take ? row[kw] : best;
                                    best_idx = take ? row0 + kw : best_idx;
                                }
                            }
                        yc[oi] = best;
                        am[oi] = best_idx + cbase;
                    }
                }
            }
    }

    Dims3 k_{1, 1, 1}, s_{1, 1, 1}, p_{0, 0, 0};
};

}  // namespace sts::nn
