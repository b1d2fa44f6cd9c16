#pragma once

#include <cstddef>
#include <vector>

namespace vloc::nn {

// Dense NCHW tensor. 2-D data (batch x features) uses h = w = 1.
template <typename T>
struct Tensor4 {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<T> v;

    void resize(int n_, int c_, int h_, int w_) {
        n = n_;
        c = c_;
        h = h_;
        w = w_;
        v.assign(static_cast<size_t>(n) * c * h * w, T(0));
    }
    size_t size() const { return v.size(); }
    int plane() const { return h * w; }
    T* sample(int i) { return v.data() + static_cast<size_t>(i) * c * h * w; }
    const T* sample(int i) const { return v.data() + static_cast<size_t>(i) * c * h * w; }
    T* channel(int i, int ch) { return sample(i) + static_cast<size_t>(ch) * h * w; }
    const T* channel(int i, int ch) const { return sample(i) + static_cast<size_t>(ch) * h * w; }
};

// Registry of flat parameter tensors; gradients and optimizer moments mirror
// its layout.
template <typename T>
struct ParamBank {
    std::vector<std::vector<T>> p;

    int add(size_t count) {
        p.emplace_back(count, T(0));
        return static_cast<int>(p.size()) - 1;
    }
    ParamBank<T> zeros_like() const {
        ParamBank<T> out;
        out.p.reserve(p.size());
        for (const auto& t : p) out.p.emplace_back(t.size(), T(0));
        return out;
    }
    void set_zero() {
        for (auto& t : p)
            for (auto& x : t) x = T(0);
    }
    void add_scaled(const ParamBank<T>& other, T scale) {
        for (size_t i = 0; i < p.size(); ++i)
            for (size_t j = 0; j < p[i].size(); ++j) p[i][j] += scale * other.p[i][j];
    }
    size_t total() const {
        size_t s = 0;
        for (const auto& t : p) s += t.size();
        return s;
    }
};

}  // namespace vloc::nn
