#include <cmath>
#include <vector>

#include "doctest.h"
#include "sts/nn/dense.hpp"
#include "sts/nn/layers.hpp"
#include "sts/nn/lstm.hpp"
#include "sts/nn/sgd.hpp"
#include "sts/nn/tensor.hpp"
#include "sts/rng.hpp"

using sts::Rng;
using sts::nn::BnCache;
using sts::nn::Conv3d;
using sts::nn::Dims3;
using sts::nn::MaxPool3d;
using sts::nn::Param;
using sts::nn::Seq;
using sts::nn::Tensor5;

namespace {

void randomize(Tensor5<double>& t, Rng& rng, double lo = -1.0, double hi = 1.0) {
    for (auto& v : t.data) v = rng.uniform(lo, hi);
}

// Direct 7-nested-loop cross-correlation, written independently of the layer.
Tensor5<double> conv_oracle(const Tensor5<double>& x, const std::vector<double>& w,
                            const std::vector<double>& b, int out_ch, Dims3 k, Dims3 s, Dims3 p) {
    const int ot = (x.t + 2 * p.t - k.t) / s.t + 1;
    const int oh = (x.h + 2 * p.h - k.h) / s.h + 1;
    const int ow = (x.w + 2 * p.w - k.w) / s.w + 1;
    Tensor5<double> y(x.n, out_ch, ot, oh, ow);
    for (int n = 0; n < x.n; ++n)
        for (int co = 0; co < out_ch; ++co)
            for (int to = 0; to < ot; ++to)
                for (int ho = 0; ho < oh; ++ho)
                    for (int wo = 0; wo < ow; ++wo) {
                        double acc = b.empty() ? 0.0 : b[co];
                        for (int ci = 0; ci < x.c; ++ci)
                            for (int kt = 0; kt < k.t; ++kt)
                                for (int kh = 0; kh < k.h; ++kh)
                                    for (int kw = 0; kw < k.w; ++kw) {
                                        const int it = to * s.t + kt - p.t;
                                        const int ih = ho * s.h + kh - p.h;
                                        const int iw = wo * s.w + kw - p.w;
                                        if (it < 0 || it >= x.t || ih < 0 || ih >= x.h || iw < 0 ||
                                            iw >= x.w)
                                            continue;
                                        const double wv =
                                            w[((((static_cast<std::size_t>(co) * x.c + ci) * k.t + kt) *
                                                    k.h +
                                                kh) *
                                               k.w) +
                                              kw];
                                        acc += wv * x.at(n, ci, it, ih, iw);
                                    }
                        y.at(n, co, to, ho, wo) = acc;
                    }
    return y;
}

Tensor5<double> pool_oracle(const Tensor5<double>& x, Dims3 k, Dims3 s, Dims3 p) {
    const int ot = (x.t + 2 * p.t - k.t) / s.t + 1;
    const int oh = (x.h + 2 * p.h - k.h) / s.h + 1;
    const int ow = (x.w + 2 * p.w - k.w) / s.w + 1;
    Tensor5<double> y(x.n, x.c, ot, oh, ow);
    for (int n = 0; n < x.n; ++n)
        for (int c = 0; c < x.c; ++c)
            for (int to = 0; to < ot; ++to)
                for (int ho = 0; ho < oh; ++ho)
                    for (int wo = 0; wo < ow; ++wo) {
                        double best = -1e300;
                        for (int kt = 0; kt < k.t; ++kt)
                            for (int kh = 0; kh < k.h; ++kh)
                                for (int kw = 0; kw < k.w; ++kw) {
                                    const int it = to * s.t + kt - p.t;
                                    const int ih = ho * s.h + kh - p.h;
                                    const int iw = wo * s.w + kw - p.w;
                                    if (it < 0 || it >= x.t || ih < 0 || ih >= x.h || iw < 0 || iw >= x.w)
                                        continue;
                                    best = std::max(best, x.at(n, c, it, ih, iw));
                                }
                        y.at(n, c, to, ho, wo) = best;
                    }
    return y;
}

}  // namespace

TEST_CASE("conv3d 1x1x1 identity") {
    Conv3d<double> conv("c", 1, 1, {1, 1, 1});
    conv.weight().value[0] = 1.0;
    Tensor5<double> x(1, 1, 3, 4, 5);
    Rng rng(1);
    randomize(x, rng);
    const auto y = conv.forward(x);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y.data[i] == doctest::Approx(x.data[i]));
}

TEST_CASE("conv3d all-ones 2x2x2 gives 8") {
    Conv3d<double> conv("c", 1, 1, {2, 2, 2});
    std::fill(conv.weight().value.begin(), conv.weight().value.end(), 1.0);
    Tensor5<double> x(1, 1, 2, 2, 2);
    x.fill(1.0);
    const auto y = conv.forward(x);
    REQUIRE(y.numel() == 1);
    CHECK(y.data[0] == doctest::Approx(8.0));
}

TEST_CASE("conv3d matches brute-force oracle") {
    Rng rng(7);
    struct Case {
        int n, ci, t, h, w, co;
        Dims3 k, s, p;
    };
    const Case cases[] = {
        {1, 2, 5, 6, 6, 3, {3, 3, 3}, {1, 1, 1}, {0, 0, 0}},
        {2, 4, 6, 8, 8, 4, {3, 3, 3}, {1, 1, 1}, {1, 1, 1}},
        {2, 3, 6, 7, 7, 2, {2, 3, 3}, {2, 2, 2}, {0, 1, 1}},
        {1, 1, 4, 5, 5, 5, {1, 1, 1}, {1, 1, 1}, {0, 0, 0}},
    };
    for (const auto& c : cases) {
        Conv3d<double> conv("c", c.ci, c.co, c.k, c.s, c.p);
        for (auto& v : conv.weight().value) v = rng.uniform(-1.0, 1.0);
        for (auto& v : conv.bias().value) v = rng.uniform(-1.0, 1.0);
        Tensor5<double> x(c.n, c.ci, c.t, c.h, c.w);
        randomize(x, rng);
        const auto got = conv.forward(x);
        const auto want = conv_oracle(x, conv.weight().value, conv.bias().value, c.co, c.k, c.s, c.p);
        REQUIRE(got.numel() == want.numel());
        for (std::size_t i = 0; i < got.numel(); ++i) CHECK(std::fabs(got.data[i] - want.data[i]) < 1e-12);
    }
}

TEST_CASE("conv3d rejects channel mismatch") {
    Conv3d<double> conv("c", 2, 1, {1, 1, 1});
    Tensor5<double> x(1, 3, 2, 2, 2);
    CHECK_THROWS_AS(conv.forward(x), sts::ShapeError);
}

TEST_CASE("batchnorm passthrough on standardized input") {
    sts::nn::BatchNorm3d<double> bn("bn", 2);
    Tensor5<double> x(2, 2, 3, 4, 4);
    Rng rng(3);
    randomize(x, rng);
    // standardize each channel first
    const std::size_t plane = x.plane();
    for (int c = 0; c < 2; ++c) {
        double sum = 0, sq = 0;
        for (int n = 0; n < 2; ++n)
            for (std::size_t i = 0; i < plane; ++i) sum += x.channel_ptr(n, c)[i];
        const double mean = sum / (2 * plane);
        for (int n = 0; n < 2; ++n)
            for (std::size_t i = 0; i < plane; ++i) {
                const double d = x.channel_ptr(n, c)[i] - mean;
                sq += d * d;
            }
        const double std = std::sqrt(sq / (2 * plane));
        for (int n = 0; n < 2; ++n)
            for (std::size_t i = 0; i < plane; ++i)
                x.channel_ptr(n, c)[i] = (x.channel_ptr(n, c)[i] - mean) / std;
    }
    BnCache<double> cache;
    const auto y = bn.forward(x, true, cache);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(std::fabs(y.data[i] - x.data[i]) < 1e-6);
}

TEST_CASE("batchnorm constant channel collapses to shift") {
    sts::nn::BatchNorm3d<double> bn("bn", 1);
    bn.shift().value[0] = 0.7;
    Tensor5<double> x(2, 1, 2, 3, 3);
    x.fill(5.0);
    BnCache<double> cache;
    const auto y = bn.forward(x, true, cache);
    for (double v : y.data) CHECK(v == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("batchnorm normalizes batch statistics") {
    sts::nn::BatchNorm3d<double> bn("bn", 3);
    Tensor5<double> x(2, 3, 4, 5, 5);
    Rng rng(11);
    randomize(x, rng, -3.0, 7.0);
    BnCache<double> cache;
    const auto y = bn.forward(x, true, cache);
    const std::size_t plane = y.plane();
    for (int c = 0; c < 3; ++c) {
        double sum = 0, sq = 0;
        for (int n = 0; n < 2; ++n)
            for (std::size_t i = 0; i < plane; ++i) sum += y.channel_ptr(n, c)[i];
        const double mean = sum / (2 * plane);
        for (int n = 0; n < 2; ++n)
            for (std::size_t i = 0; i < plane; ++i) {
                const double d = y.channel_ptr(n, c)[i] - mean;
                sq += d * d;
            }
        const double var = sq / (2 * plane);
        CHECK(std::fabs(mean) < 1e-10);
        CHECK(std::fabs(var - 1.0) < 1e-6);
    }
}

TEST_CASE("relu basics and elementwise oracle") {
    Tensor5<double> x(1, 1, 1, 1, 6);
    x.data = {-2.0, -0.5, 0.0, 0.5, 2.0, -1e9};
    auto y = x;
    sts::nn::relu_inplace(y);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y.data[i] == std::max(0.0, x.data[i]));

    Tensor5<double> dy(1, 1, 1, 1, 6);
    dy.fill(1.0);
    sts::nn::relu_backward_inplace(y, dy);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(dy.data[i] == (x.data[i] > 0.0 ? 1.0 : 0.0));
}

TEST_CASE("maxpool constant input stays constant") {
    MaxPool3d<double> pool({3, 3, 3}, {1, 1, 1}, {1, 1, 1});
    Tensor5<double> x(1, 2, 4, 4, 4);
    x.fill(2.5);
    std::vector<std::int32_t> am;
    const auto y = pool.forward(x, am);
    CHECK(y.same_shape(x));
    for (double v : y.data) CHECK(v == doctest::Approx(2.5));
}

TEST_CASE("maxpool 1x1x1 window is the identity") {
    MaxPool3d<double> pool({1, 1, 1}, {1, 1, 1});
    Tensor5<double> x(1, 1, 3, 3, 3);
    Rng rng(5);
    randomize(x, rng);
    std::vector<std::int32_t> am;
    const auto y = pool.forward(x, am);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y.data[i] == x.data[i]);
}

TEST_CASE("maxpool matches brute-force oracle") {
    Rng rng(9);
    Tensor5<double> x(2, 3, 6, 8, 8);
    randomize(x, rng);
    for (const auto& [k, s, p] : {std::tuple{Dims3{3, 3, 3}, Dims3{1, 1, 1}, Dims3{1, 1, 1}},
                                  std::tuple{Dims3{2, 2, 2}, Dims3{2, 2, 2}, Dims3{0, 0, 0}},
                                  std::tuple{Dims3{1, 2, 2}, Dims3{1, 2, 2}, Dims3{0, 0, 0}}}) {
        MaxPool3d<double> pool(k, s, p);
        std::vector<std::int32_t> am;
        const auto got = pool.forward(x, am);
        const auto want = pool_oracle(x, k, s, p);
        REQUIRE(got.numel() == want.numel());
        for (std::size_t i = 0; i < got.numel(); ++i) CHECK(got.data[i] == doctest::Approx(want.data[i]));
    }
}

TEST_CASE("maxpool rejects oversized window") {
    MaxPool3d<double> pool({5, 1, 1}, {1, 1, 1});
    Tensor5<double> x(1, 1, 3, 3, 3);
    std::vector<std::int32_t> am;
    CHECK_THROWS_AS(pool.forward(x, am), sts::ShapeError);
}

TEST_CASE("lstm all-zero parameters give zero hidden state") {
    sts::nn::Lstm<double> lstm("l", 4, 3);
    Seq<double> x(5, 2, 4);
    Rng rng(2);
    for (auto& v : x.data) v = rng.uniform(-1.0, 1.0);
    sts::nn::Lstm<double>::Cache cache;
    const auto h = lstm.forward(x, cache);
    for (double v : h) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("lstm single step matches a hand-computed cell") {
    // 2 units, 1 feature, weights chosen so the arithmetic is easy to follow.
    sts::nn::Lstm<double> lstm("l", 1, 2);
    auto& wx = lstm.wx().value;   // rows: i0 i1 f0 f1 g0 g1 o0 o1
    auto& b = lstm.bias().value;
    wx = {0.5, -0.5, 0.25, 0.0, 1.0, -1.0, 0.0, 2.0};
    b = {0.1, 0.0, -0.1, 0.2, 0.0, 0.3, 0.5, -0.5};
    Seq<double> x(1, 1, 1);
    x.data = {0.8};
    sts::nn::Lstm<double>::Cache cache;
    const auto h = lstm.forward(x, cache);

    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    for (int u = 0; u < 2; ++u) {
        const double i_g = sig(wx[u] * 0.8 + b[u]);
        const double f_g = sig(wx[2 + u] * 0.8 + b[2 + u]);
        const double g_g = std::tanh(wx[4 + u] * 0.8 + b[4 + u]);
        const double o_g = sig(wx[6 + u] * 0.8 + b[6 + u]);
        const double c = f_g * 0.0 + i_g * g_g;
        CHECK(h[u] == doctest::Approx(o_g * std::tanh(c)).epsilon(1e-12));
    }
}

TEST_CASE("lstm matches an independently unrolled recurrence") {
    const int S = 3, F = 4, U = 2;
    sts::nn::Lstm<double> lstm("l", F, U);
    Rng rng(17);
    for (auto& v : lstm.wx().value) v = rng.uniform(-0.8, 0.8);
    for (auto& v : lstm.wh().value) v = rng.uniform(-0.8, 0.8);
    for (auto& v : lstm.bias().value) v = rng.uniform(-0.5, 0.5);
    Seq<double> x(S, 1, F);
    for (auto& v : x.data) v = rng.uniform(-1.0, 1.0);

    sts::nn::Lstm<double>::Cache cache;
    const auto got = lstm.forward(x, cache);

    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    std::vector<double> h(U, 0.0), c(U, 0.0);
    for (int s = 0; s < S; ++s) {
        std::vector<double> pre(4 * U);
        for (int g = 0; g < 4 * U; ++g) {
            double acc = lstm.bias().value[g];
            for (int f = 0; f < F; ++f) acc += lstm.wx().value[g * F + f] * x.data[s * F + f];
            for (int u = 0; u < U; ++u) acc += lstm.wh().value[g * U + u] * h[u];
            pre[g] = acc;
        }
        for (int u = 0; u < U; ++u) {
            const double ig = sig(pre[u]);
            const double fg = sig(pre[U + u]);
            const double gg = std::tanh(pre[2 * U + u]);
            const double og = sig(pre[3 * U + u]);
            c[u] = fg * c[u] + ig * gg;
            h[u] = og * std::tanh(c[u]);
        }
    }
    for (int u = 0; u < U; ++u) CHECK(std::fabs(got[u] - h[u]) < 1e-12);
}

TEST_CASE("softmax basics") {
    using sts::nn::softmax;
    const auto uniform = softmax<double>({0.0, 0.0, 0.0}, 1, 3);
    for (double p : uniform) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    const auto extreme = softmax<double>({1000.0, 0.0, 0.0}, 1, 3);
    CHECK(std::isfinite(extreme[0]));
    CHECK(extreme[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(extreme[1] == doctest::Approx(0.0));

    Rng rng(23);
    std::vector<double> logits(3);
    for (auto& v : logits) v = rng.uniform(-4.0, 4.0);
    const auto probs = softmax(logits, 1, 3);
    double z = 0;
    for (double l : logits) z += std::exp(l);
    double sum = 0;
    for (int c = 0; c < 3; ++c) {
        CHECK(probs[c] == doctest::Approx(std::exp(logits[c]) / z).epsilon(1e-12));
        sum += probs[c];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("softmax stays normalized at extreme magnitudes") {
    Rng rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> logits(3);
        for (auto& v : logits) v = rng.uniform(-1e4, 1e4);
        const auto probs = sts::nn::softmax(logits, 1, 3);
        double sum = 0;
        for (double p : probs) {
            CHECK(std::isfinite(p));
            sum += p;
        }
        CHECK(std::fabs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("cross entropy values") {
    using sts::nn::cross_entropy;
    CHECK(cross_entropy<double>({1.0, 0.0, 0.0}, {0}, 3) == doctest::Approx(0.0));
    CHECK(cross_entropy<double>({1.0 / 3, 1.0 / 3, 1.0 / 3}, {1}, 3) ==
          doctest::Approx(std::log(3.0)).epsilon(1e-12));
    // random case against the direct formula
    Rng rng(31);
    std::vector<double> logits = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const auto probs = sts::nn::softmax(logits, 1, 3);
    CHECK(cross_entropy(probs, {2}, 3) == doctest::Approx(-std::log(probs[2])).epsilon(1e-12));
}

TEST_CASE("cross entropy gradient is probs minus one-hot over batch") {
    const std::vector<double> probs = {0.2, 0.5, 0.3, 0.6, 0.3, 0.1};
    const auto d = sts::nn::cross_entropy_grad(probs, {1, 0}, 3);
    CHECK(d[0] == doctest::Approx(0.1));
    CHECK(d[1] == doctest::Approx(-0.25));
    CHECK(d[3] == doctest::Approx(-0.2));
}

TEST_CASE("sgd momentum update") {
    Param<double> p;
    p.init_shape("p", {1});

    SUBCASE("zero gradient leaves parameters unchanged") {
        p.value[0] = 1.5;
        sts::nn::SgdOptimizer<double> opt(0.1, 0.9);
        opt.step({&p});
        CHECK(p.value[0] == doctest::Approx(1.5));
    }

    SUBCASE("single step without momentum") {
        p.value[0] = 0.0;
        p.grad[0] = 1.0;
        sts::nn::SgdOptimizer<double> opt(0.1, 0.0);
        opt.step({&p});
        CHECK(p.value[0] == doctest::Approx(-0.1));
    }

    SUBCASE("three-step momentum matches the hand recurrence") {
        p.value[0] = 0.0;
        sts::nn::SgdOptimizer<double> opt(0.1, 0.9);
        const double grads[3] = {1.0, -0.5, 0.25};
        double v = 0.0, ref = 0.0;
        for (double g : grads) {
            p.grad[0] = g;
            opt.step({&p});
            v = 0.9 * v - 0.1 * g;
            ref += v;
            CHECK(p.value[0] == doctest::Approx(ref).epsilon(1e-15));
        }
    }

    SUBCASE("non-finite gradient is a training error naming the parameter") {
        p.grad[0] = std::nan("");
        sts::nn::SgdOptimizer<double> opt(0.1, 0.9);
        CHECK_THROWS_WITH_AS(opt.step({&p}), doctest::Contains("p"), sts::TrainingError);
    }
}

TEST_CASE("layer forwards are deterministic") {
    Rng rng(37);
    Conv3d<double> conv("c", 2, 3, {3, 3, 3}, {1, 1, 1}, {1, 1, 1});
    for (auto& v : conv.weight().value) v = rng.uniform(-1, 1);
    Tensor5<double> x(1, 2, 4, 5, 5);
    randomize(x, rng);
    const auto y1 = conv.forward(x);
    const auto y2 = conv.forward(x);
    CHECK(y1.data == y2.data);
}
