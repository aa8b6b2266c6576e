#pragma once

#include <cmath>
#include <vector>

#include "sts/errors.hpp"
#include "sts/nn/tensor.hpp"

namespace sts::nn {

// Classical momentum: v <- mu*v - lr*g; p <- p + v.
template <typename T>
class SgdOptimizer {
public:
    SgdOptimizer(T learning_rate, T momentum) : lr_(learning_rate), mu_(momentum) {}

    void step(const std::vector<Param<T>*>& params) {
        if (velocity_.size() != params.size()) {
            velocity_.resize(params.size());
            for (std::size_t i = 0; i < params.size(); ++i) velocity_[i].assign(params[i]->numel(), T(0));
        }
        for (std::size_t i = 0; i < params.size(); ++i) {
            Param<T>& p = *params[i];
            std::vector<T>& v = velocity_[i];
            for (std::size_t j = 0; j < p.numel(); ++j) {
                if (!std::isfinite(static_cast<double>(p.grad[j]))) {
                    throw TrainingError("non-finite gradient in " + p.name);
                }
                v[j] = mu_ * v[j] - lr_ * p.grad[j];
                p.value[j] += v[j];
            }
        }
    }

    static void zero_grad(const std::vector<Param<T>*>& params) {
        for (Param<T>* p : params) std::fill(p->grad.begin(), p->grad.end(), T(0));
    }

    T learning_rate() const { return lr_; }
    T momentum() const { return mu_; }

private:
    T lr_, mu_;
    std::vector<std::vector<T>> velocity_;
};

}  // namespace sts::nn
