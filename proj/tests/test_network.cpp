#include <cmath>
#include <set>

#include "doctest.h"
#include "sts/classifier/network.hpp"
#include "sts/classifier/sampler.hpp"
#include "sts/csv.hpp"
#include "sts/classifier/train.hpp"
#include "sts/nn/checkpoint.hpp"
#include "sts/nn/dense.hpp"
#include "sts/nn/sgd.hpp"

using namespace sts::clf;
using sts::Rng;

namespace {

// Small configuration exercising the same topology rules as the production
// network: one stack, temporal pool to 4 steps, spatial 12 -> 6 -> adaptive 2x2.
NetworkConfig toy_config() {
    NetworkConfig cfg;
    cfg.input_t = 8;
    cfg.input_h = 12;
    cfg.input_w = 12;
    cfg.stack_filters = {8};
    cfg.lstm_units = 8;
    cfg.pseudo_time_steps = 4;
    cfg.feature_dim = 32;
    return cfg;
}

}  // namespace

TEST_CASE("default config reaches the 25x512 reshape") {
    NetworkConfig cfg;
    cfg.validate();
    Network<float> net(cfg);
    bool found = false;
    for (const auto& row : net.topology()) {
        if (row.name == "reshape") {
            CHECK(row.output_shape == "(25,512)");
            found = true;
        }
    }
    CHECK(found);
    CHECK(net.pseudo_time_steps() == 25);
    CHECK(net.feature_dim() == 512);

    // parameter manifest covers 4 stacks, the LSTM and the dense head
    Network<float> full(cfg);
    std::set<std::string> prefixes;
    for (auto* p : full.trainable_params()) prefixes.insert(p->name.substr(0, p->name.find('.')));
    CHECK(prefixes.count("stack1") == 1);
    CHECK(prefixes.count("stack4") == 1);
    CHECK(prefixes.count("lstm") == 1);
    CHECK(prefixes.count("head") == 1);
}

TEST_CASE("invalid configs explain the arithmetic") {
    NetworkConfig cfg;
    cfg.feature_dim = 511;
    CHECK_THROWS_WITH_AS(Network<float>{cfg}, doctest::Contains("511"), sts::ConfigError);

    NetworkConfig odd;
    odd.stack_filters = {16, 32, 64, 130};
    CHECK_THROWS_AS(Network<float>{odd}, sts::ConfigError);

    NetworkConfig tiny = toy_config();
    tiny.input_h = 6;  // collapses below the adaptive pool minimum
    CHECK_THROWS_AS(Network<float>{tiny}, sts::ConfigError);
}

TEST_CASE("toy network shape trace matches the independently computed schedule") {
    const NetworkConfig cfg = toy_config();
    Network<double> net(cfg);

    // recompute the topology straight from the pooling formulas
    int t = cfg.input_t, h = cfg.input_h;
    t = (t - 2) / 2 + 1;  // temporal pool after stack 1
    h = (h - 2) / 2 + 1;  // spatial pool
    CHECK(t == 4);
    CHECK(h == 6);
    const int feat = cfg.stack_filters.back() * 2 * 2;
    CHECK(feat == cfg.feature_dim);

    for (const auto& row : net.topology()) {
        if (row.name == "stack1") CHECK(row.output_shape == "(N,8,8,12,12)");
        if (row.name == "stack1.tpool") CHECK(row.output_shape == "(N,8,4,12,12)");
        if (row.name == "stack1.spool") CHECK(row.output_shape == "(N,8,4,6,6)");
        if (row.name == "adaptive_pool") CHECK(row.output_shape == "(N,8,4,2,2)");
        if (row.name == "reshape") CHECK(row.output_shape == "(4,32)");
    }

    // batch-2 forward produces one logit triple per sample
    net.init_weights(3);
    sts::nn::Tensor5<double> x(2, 1, cfg.input_t, cfg.input_h, cfg.input_w);
    Rng rng(4);
    for (auto& v : x.data) v = rng.uniform() < 0.3 ? 1.0 : 0.0;
    const auto logits = net.forward(x, true);
    CHECK(logits.size() == 6);
    for (double v : logits) CHECK(std::isfinite(v));
}

TEST_CASE("zeroed head yields uniform probabilities and the declared tie-break") {
    const NetworkConfig cfg = toy_config();
    Network<double> net(cfg);
    net.init_weights(5);
    // zero the dense head
    for (auto* p : net.trainable_params()) {
        if (p->name.rfind("head", 0) == 0) std::fill(p->value.begin(), p->value.end(), 0.0);
    }
    sts::nn::Tensor5<double> x(1, 1, cfg.input_t, cfg.input_h, cfg.input_w);
    x.zero();
    const auto logits = net.forward(x, false);
    const auto probs = sts::nn::softmax(logits, 1, 3);
    for (double p : probs) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    double arr[3] = {probs[0], probs[1], probs[2]};
    CHECK(argmax_class(arr) == StSClass::SitToStand);  // ties break by class order
}

TEST_CASE("argmax is invariant under strictly monotonic logit transforms") {
    Rng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        double logits[3] = {rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
        std::vector<double> base = {logits[0], logits[1], logits[2]};
        const auto p0 = sts::nn::softmax(base, 1, 3);
        double a0[3] = {p0[0], p0[1], p0[2]};
        const StSClass want = argmax_class(a0);

        for (int xf = 0; xf < 3; ++xf) {
            std::vector<double> mapped(3);
            for (int c = 0; c < 3; ++c) {
                const double v = base[c];
                mapped[c] = xf == 0 ? 2.5 * v + 1.0 : xf == 1 ? v * v * v : std::exp(v);
            }
            const auto p = sts::nn::softmax(mapped, 1, 3);
            double a[3] = {p[0], p[1], p[2]};
            CHECK(argmax_class(a) == want);
        }
    }
}

TEST_CASE("network forward-backward-step is bitwise deterministic") {
    const NetworkConfig cfg = toy_config();
    auto run = [&]() {
        Network<float> net(cfg);
        net.init_weights(7);
        sts::nn::Tensor5<float> x(2, 1, cfg.input_t, cfg.input_h, cfg.input_w);
        Rng rng(8);
        for (auto& v : x.data) v = rng.uniform() < 0.4 ? 1.0f : 0.0f;
        sts::nn::SgdOptimizer<float> opt(0.05f, 0.9f);
        const auto params = net.trainable_params();
        for (int it = 0; it < 3; ++it) {
            const auto logits = net.forward(x, true);
            const auto probs = sts::nn::softmax(logits, 2, 3);
            sts::nn::SgdOptimizer<float>::zero_grad(params);
            net.backward(sts::nn::cross_entropy_grad(probs, {0, 2}, 3));
            opt.step(params);
        }
        std::vector<float> flat;
        for (auto* p : net.checkpoint_params()) flat.insert(flat.end(), p->value.begin(), p->value.end());
        return flat;
    };
    CHECK(run() == run());
}

TEST_CASE("checkpoint round-trip and shape rejection") {
    const NetworkConfig cfg = toy_config();
    Network<float> net(cfg);
    net.init_weights(11);
    const std::string path = "/tmp/sts_ckpt_test.ckpt";
    sts::nn::save_checkpoint(path, net.checkpoint_params());

    Network<float> other(cfg);
    other.init_weights(999);
    sts::nn::load_checkpoint(path, other.checkpoint_params());
    const auto a = net.checkpoint_params();
    const auto b = other.checkpoint_params();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i]->value == b[i]->value);

    NetworkConfig bigger = toy_config();
    bigger.stack_filters = {12};
    bigger.feature_dim = 48;
    Network<float> mismatched(bigger);
    CHECK_THROWS_AS(sts::nn::load_checkpoint(path, mismatched.checkpoint_params()), sts::ShapeError);

    sts::write_text_file(path, "not a checkpoint");
    CHECK_THROWS_AS(sts::nn::load_checkpoint(path, other.checkpoint_params()), sts::FormatError);
}

TEST_CASE("balanced sampler: Table-1-scale counts give epoch size 339+491+415") {
    std::vector<StSClass> labels;
    labels.insert(labels.end(), 339, StSClass::SitToStand);
    labels.insert(labels.end(), 491, StSClass::StandToSit);
    labels.insert(labels.end(), 107404, StSClass::Other);
    BalancedSampler sampler(labels, 1);
    CHECK(sampler.other_subset_size() == 415);
    const auto epoch = sampler.epoch();
    CHECK(epoch.size() == 339u + 491u + 415u);

    // all minority indices exactly once
    std::vector<int> seen(830, 0);
    std::size_t others = 0;
    for (std::size_t idx : epoch) {
        if (idx < 830)
            ++seen[idx];
        else
            ++others;
    }
    CHECK(others == 415);
    for (int s : seen) CHECK(s == 1);
}

TEST_CASE("balanced sampler: tiny equal counts keep every index") {
    std::vector<StSClass> labels;
    labels.insert(labels.end(), 5, StSClass::SitToStand);
    labels.insert(labels.end(), 5, StSClass::StandToSit);
    labels.insert(labels.end(), 5, StSClass::Other);
    BalancedSampler sampler(labels, 2);
    for (int e = 0; e < 3; ++e) {
        auto epoch = sampler.epoch();
        CHECK(epoch.size() == 15);
        std::sort(epoch.begin(), epoch.end());
        for (std::size_t i = 0; i < 15; ++i) CHECK(epoch[i] == i);
    }
}

TEST_CASE("balanced sampler warns when Other is undersized") {
    std::vector<StSClass> labels;
    labels.insert(labels.end(), 10, StSClass::SitToStand);
    labels.insert(labels.end(), 20, StSClass::StandToSit);
    labels.insert(labels.end(), 5, StSClass::Other);
    BalancedSampler sampler(labels, 3);
    CHECK(sampler.undersized_other());
    CHECK(sampler.other_subset_size() == 5);
    CHECK(sampler.epoch().size() == 35);
}

TEST_CASE("balanced sampler resamples Other across epochs") {
    std::vector<StSClass> labels;
    labels.insert(labels.end(), 10, StSClass::SitToStand);
    labels.insert(labels.end(), 10, StSClass::StandToSit);
    labels.insert(labels.end(), 10000, StSClass::Other);
    BalancedSampler sampler(labels, 4);
    std::set<std::size_t> first, second;
    for (std::size_t idx : sampler.epoch())
        if (idx >= 20) first.insert(idx);
    for (std::size_t idx : sampler.epoch())
        if (idx >= 20) second.insert(idx);
    CHECK(first.size() == 10);
    CHECK(second.size() == 10);
    CHECK(first != second);
}

namespace {

// Wilson-Hilferty approximation of the chi-square upper-tail p-value.
double chi2_p_value(double stat, double dof) {
    const double z = (std::cbrt(stat / dof) - (1.0 - 2.0 / (9.0 * dof))) / std::sqrt(2.0 / (9.0 * dof));
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace

TEST_CASE("balanced sampler Other coverage is consistent with uniform sampling") {
    const int n_other = 10000, epochs = 100;
    std::vector<StSClass> labels;
    labels.insert(labels.end(), 10, StSClass::SitToStand);
    labels.insert(labels.end(), 10, StSClass::StandToSit);
    labels.insert(labels.end(), n_other, StSClass::Other);
    BalancedSampler sampler(labels, 5);
    std::vector<long long> freq(n_other, 0);
    for (int e = 0; e < epochs; ++e) {
        for (std::size_t idx : sampler.epoch())
            if (idx >= 20) ++freq[idx - 20];
    }
    const double expected = 10.0 * epochs / n_other;
    double stat = 0;
    for (long long f : freq) stat += (f - expected) * (f - expected) / expected;
    const double p = chi2_p_value(stat, n_other - 1);
    CHECK(p > 0.01);
}

TEST_CASE("cross-validation overall equals the confusion-matrix recomputation") {
    // three synthetic "houses" with label-only data and a stub predictor
    Rng rng(41);
    std::vector<sts::eval::ConfusionMatrix3> folds(3);
    for (auto& m : folds) {
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) m.counts[r][c] = static_cast<long long>(rng.index(50)) + (r == c ? 60 : 0);
    }
    for (const auto& m : folds) {
        const auto report = sts::eval::accuracy_from_matrix(m);
        double want = 0;
        for (int c = 0; c < 3; ++c)
            want += static_cast<double>(m.counts[c][c]) / static_cast<double>(m.row_sum(c));
        want /= 3.0;
        CHECK(report.overall == doctest::Approx(want).epsilon(1e-12));
    }
}
