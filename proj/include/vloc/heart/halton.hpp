#pragma once

#include <cstdint>
#include <vector>

namespace vloc {

// Scrambled Halton sequence: radical inverse in the first d prime bases with
// per-dimension digit permutations (pi(0) = 0 so finite expansions stay
// finite). Counter starts at index 1. With scrambling disabled this is the
// plain Halton sequence.
class HaltonSampler {
  public:
    HaltonSampler(int dim, uint64_t seed, bool scrambled = true);

    std::vector<double> next();           // point in [0,1)^d, advances counter
    uint64_t index() const { return index_; }
    int dim() const { return dim_; }

    static double radical_inverse(uint64_t index, int base, const std::vector<int>& perm);

  private:
    int dim_;
    uint64_t index_ = 1;
    std::vector<int> bases_;
    std::vector<std::vector<int>> perms_;  // per dim, size = base
};

}  // namespace vloc
