#pragma once

#include <cmath>
#include <stdexcept>

#include "vloc/nn/tensor.hpp"

namespace vloc::nn {

enum class LossKind { ScaleNet, RegNet, ClassNet };

// Numerically stable binary cross entropy on a logit (negative
// log-likelihood, positive loss). d/dz = sigmoid(z) - label.
template <typename T>
T bce_logit(T z, T label) {
    const T zabs = std::abs(z);
    return std::max(z, T(0)) - z * label + std::log1p(std::exp(-zabs));
}

template <typename T>
T sigmoid(T z) {
    return T(1) / (T(1) + std::exp(-z));
}

// Mean squared error over both outputs and the batch; labels normalized to
// [0,1] (ms / 700).
template <typename T>
T loss_scalenet(const Tensor4<T>& pred, const Tensor4<T>& labels, Tensor4<T>* grad = nullptr) {
    if (pred.n != labels.n || pred.c != 2 || labels.c != 2)
        throw std::runtime_error("loss_scalenet: expected (N,2) shapes");
    const T denom = T(pred.n) * 2;
    T loss = 0;
    if (grad) grad->resize(pred.n, 2, 1, 1);
    for (size_t i = 0; i < pred.v.size(); ++i) {
        const T d = pred.v[i] - labels.v[i];
        loss += d * d;
        if (grad) grad->v[i] = 2 * d / denom;
    }
    return loss / denom;
}

// Multi-task loss: weighted squared errors on the continuous coordinates
// plus logit BCEs on the binary ones. Prediction layout per sample:
// (a, r_sin, r_cos, m_logit, v_logit); label layout (a, r_sin, r_cos, m, v).
// The rotational terms carry the label's apicobasal value as weight, which
// kills them at the apex where rotation is undefined.
template <typename T>
T loss_regnet(const Tensor4<T>& pred, const Tensor4<T>& labels, Tensor4<T>* grad = nullptr) {
    if (pred.n != labels.n || pred.c != 5 || labels.c != 5)
        throw std::runtime_error("loss_regnet: expected (N,5) shapes");
    const T inv_n = T(1) / pred.n;
    T loss = 0;
    if (grad) grad->resize(pred.n, 5, 1, 1);
    for (int s = 0; s < pred.n; ++s) {
        const T* y = pred.sample(s);
        const T* l = labels.sample(s);
        if (l[0] < T(0) || l[0] > T(1)) throw std::runtime_error("loss_regnet: label a outside [0,1]");
        const T da = l[0] - y[0];
        const T ds = l[1] - y[1];
        const T dc = l[2] - y[2];
        loss += T(6.25) * da * da + l[0] * (ds * ds + dc * dc);
        loss += bce_logit(y[3], l[3]) + bce_logit(y[4], l[4]);
        if (grad) {
            T* g = grad->sample(s);
            g[0] = T(-2) * T(6.25) * da * inv_n;
            g[1] = T(-2) * l[0] * ds * inv_n;
            g[2] = T(-2) * l[0] * dc * inv_n;
            g[3] = (sigmoid(y[3]) - l[3]) * inv_n;
            g[4] = (sigmoid(y[4]) - l[4]) * inv_n;
        }
    }
    return loss * inv_n;
}

// Cross entropy of the softmax against fuzzy (simplex) labels, stabilized by
// max subtraction. Invariant under adding a constant to all logits.
template <typename T>
T loss_classnet(const Tensor4<T>& logits, const Tensor4<T>& labels, Tensor4<T>* grad = nullptr) {
    if (logits.n != labels.n || logits.c != labels.c)
        throw std::runtime_error("loss_classnet: shape mismatch");
    const int C = logits.c;
    const T inv_n = T(1) / logits.n;
    T loss = 0;
    if (grad) grad->resize(logits.n, C, 1, 1);
    std::vector<T> soft(static_cast<size_t>(C));
    for (int s = 0; s < logits.n; ++s) {
        const T* z = logits.sample(s);
        const T* l = labels.sample(s);
        T lsum = 0;
        for (int i = 0; i < C; ++i) lsum += l[i];
        if (std::abs(lsum - T(1)) > T(1e-6))
            throw std::runtime_error("loss_classnet: label not on the simplex");
        T zmax = z[0];
        for (int i = 1; i < C; ++i) zmax = std::max(zmax, z[i]);
        T denom = 0;
        for (int i = 0; i < C; ++i) {
            soft[static_cast<size_t>(i)] = std::exp(z[i] - zmax);
            denom += soft[static_cast<size_t>(i)];
        }
        const T log_denom = std::log(denom);
        for (int i = 0; i < C; ++i) {
            soft[static_cast<size_t>(i)] /= denom;
            if (l[i] > 0) loss -= l[i] * (z[i] - zmax - log_denom);
        }
        if (grad) {
            T* g = grad->sample(s);
            for (int i = 0; i < C; ++i) g[i] = (soft[static_cast<size_t>(i)] - l[i]) * inv_n;
        }
    }
    return loss * inv_n;
}

template <typename T>
T loss_value(LossKind kind, const Tensor4<T>& pred, const Tensor4<T>& labels,
             Tensor4<T>* grad = nullptr) {
    switch (kind) {
        case LossKind::ScaleNet: return loss_scalenet(pred, labels, grad);
        case LossKind::RegNet: return loss_regnet(pred, labels, grad);
        case LossKind::ClassNet: return loss_classnet(pred, labels, grad);
    }
    throw std::runtime_error("loss_value: unknown loss");
}

}  // namespace vloc::nn
