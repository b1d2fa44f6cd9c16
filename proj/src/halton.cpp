#include "vloc/heart/halton.hpp"

#include <stdexcept>

#include "vloc/core/rng.hpp"

namespace vloc {

namespace {

std::vector<int> first_primes(int n) {
    std::vector<int> primes;
    int candidate = 2;
    while (static_cast<int>(primes.size()) < n) {
        bool is_prime = true;
        for (int p : primes) {
            if (p * p > candidate) break;
            if (candidate % p == 0) {
                is_prime = false;
                break;
            }
        }
        if (is_prime) primes.push_back(candidate);
        ++candidate;
    }
    return primes;
}

}  // namespace

HaltonSampler::HaltonSampler(int dim, uint64_t seed, bool scrambled) : dim_(dim) {
    if (dim < 1) throw std::runtime_error("halton: dim must be >= 1");
    bases_ = first_primes(dim);
    perms_.resize(static_cast<size_t>(dim));
    for (int d = 0; d < dim; ++d) {
        const int b = bases_[static_cast<size_t>(d)];
        auto& perm = perms_[static_cast<size_t>(d)];
        perm.resize(static_cast<size_t>(b));
        for (int i = 0; i < b; ++i) perm[static_cast<size_t>(i)] = i;
        if (scrambled && b > 2) {
            // Fisher-Yates over digits 1..b-1; digit 0 stays fixed.
            Rng rng(seed, 0x4a17 + static_cast<uint64_t>(d) * 131);
            for (int i = b - 1; i > 1; --i) {
                const int j = 1 + static_cast<int>(rng.uniform_int(static_cast<uint64_t>(i)));
                std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
            }
        }
    }
}

double HaltonSampler::radical_inverse(uint64_t index, int base, const std::vector<int>& perm) {
    double inv_base = 1.0 / base;
    double factor = inv_base;
    double value = 0.0;
    while (index > 0) {
        const int digit = static_cast<int>(index % static_cast<uint64_t>(base));
        value += perm[static_cast<size_t>(digit)] * factor;
        index /= static_cast<uint64_t>(base);
        factor *= inv_base;
    }
    return value;
}

std::vector<double> HaltonSampler::next() {
    std::vector<double> out(static_cast<size_t>(dim_));
    for (int d = 0; d < dim_; ++d)
        out[static_cast<size_t>(d)] =
            radical_inverse(index_, bases_[static_cast<size_t>(d)], perms_[static_cast<size_t>(d)]);
    ++index_;
    return out;
}

}  // namespace vloc
