#pragma once

#include <cmath>

#include "vloc/nn/tensor.hpp"

namespace vloc::nn {

// Bias-corrected Adam over a parameter bank.
template <typename T>
class Adam {
  public:
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    explicit Adam(const ParamBank<T>& params)
        : m_(params.zeros_like()), v_(params.zeros_like()) {}

    void step(ParamBank<T>& params, const ParamBank<T>& grads, double lr) {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1, t_);
        const double bc2 = 1.0 - std::pow(beta2, t_);
        for (size_t i = 0; i < params.p.size(); ++i) {
            auto& p = params.p[i];
            auto& m = m_.p[i];
            auto& v = v_.p[i];
            const auto& g = grads.p[i];
            for (size_t j = 0; j < p.size(); ++j) {
                m[j] = static_cast<T>(beta1 * m[j] + (1.0 - beta1) * g[j]);
                v[j] = static_cast<T>(beta2 * v[j] + (1.0 - beta2) * g[j] * g[j]);
                const double mhat = m[j] / bc1;
                const double vhat = v[j] / bc2;
                p[j] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + eps));
            }
        }
    }

    long step_count() const { return t_; }

  private:
    ParamBank<T> m_, v_;
    long t_ = 0;
};

}  // namespace vloc::nn
