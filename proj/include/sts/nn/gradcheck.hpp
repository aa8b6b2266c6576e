#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "sts/nn/tensor.hpp"
#include "sts/rng.hpp"

namespace sts::nn {

struct GradCheckEntry {
    std::string param_name;
    std::size_t checked = 0;
    double max_rel_error = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double max_rel_error = 0.0;
};

// Central finite differences against already-computed analytic gradients.
// loss_fn must re-run the full forward pass and return the scalar loss for the
// current parameter values. Checks a random subsample of at least
// min_per_param entries per parameter tensor (all of them when smaller).
inline GradCheckReport grad_check(const std::vector<Param<double>*>& params,
                                  const std::function<double()>& loss_fn, double h = 1e-5,
                                  std::size_t min_per_param = 200, std::uint64_t seed = 7) {
    Rng rng(seed);
    GradCheckReport report;
    for (Param<double>* p : params) {
        GradCheckEntry entry;
        entry.param_name = p->name;
        std::vector<std::size_t> indices;
        if (p->numel() <= min_per_param) {
            indices.resize(p->numel());
            for (std::size_t i = 0; i < p->numel(); ++i) indices[i] = i;
        } else {
            indices = rng.sample_without_replacement(p->numel(), min_per_param);
        }
        for (std::size_t idx : indices) {
            const double saved = p->value[idx];
            p->value[idx] = saved + h;
            const double lp = loss_fn();
            p->value[idx] = saved - h;
            const double lm = loss_fn();
            p->value[idx] = saved;
            const double numeric = (lp - lm) / (2.0 * h);
            const double analytic = p->grad[idx];
            const double rel = std::fabs(analytic - numeric) /
                               std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
            entry.max_rel_error = std::max(entry.max_rel_error, rel);
            ++entry.checked;
        }
        report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace sts::nn
