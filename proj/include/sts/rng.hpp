#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace sts {

// Deterministic RNG with self-contained distributions. std::*_distribution
// output is implementation-defined, so everything downstream of a seed goes
// through this class to keep generated datasets byte-identical across
// compilers and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Unbiased integer in [0, bound) via rejection.
    std::uint64_t uniform_u64(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % bound;
    }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform_u64(n)); }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; caches the second variate.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    // Knuth's method; fine for the small rates used here.
    int poisson(double lambda) {
        const double limit = std::exp(-lambda);
        double p = 1.0;
        int k = 0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

    // k distinct values from [0, n), by partial Fisher-Yates over a scratch pool.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        if (pool_.size() != n) {
            pool_.resize(n);
            for (std::size_t i = 0; i < n; ++i) pool_[i] = i;
        }
        std::vector<std::size_t> out(k);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + index(n - i);
            std::swap(pool_[i], pool_[j]);
            out[i] = pool_[i];
        }
        return out;
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
    std::vector<std::size_t> pool_;
};

}  // namespace sts
