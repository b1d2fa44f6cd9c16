#pragma once

#include <string>

#include "vloc/sig/bsp_image.hpp"

namespace vloc {

enum class SvdAxis { Spatial, Temporal };

// Truncated orthonormal basis learned from training images; spatial bases
// live in lead space (224 x k), temporal ones in sample space (125 x k).
struct SvdBasis {
    Eigen::MatrixXf basis;
    std::vector<float> singular_values;  // non-increasing
    SvdAxis axis = SvdAxis::Spatial;
    uint64_t training_hash = 0;

    int rank() const { return static_cast<int>(basis.cols()); }
};

// Streamed Gram accumulation: images are fed in a fixed order; the basis is
// the top-k eigenvectors of the accumulated second-moment matrix.
class SvdAccumulator {
  public:
    explicit SvdAccumulator(SvdAxis axis = SvdAxis::Spatial) : axis_(axis) {}

    void add(const BSPImage& img);
    SvdBasis finalize(int k) const;
    long n_vectors() const { return n_; }

  private:
    SvdAxis axis_;
    Eigen::MatrixXd gram_;  // dim x dim
    long n_ = 0;
    uint64_t hash_ = 0xcbf29ce484222325ull;
};

// Projects each time column (spatial) or each lead row (temporal) onto the
// basis span.
BSPImage svd_filter(const BSPImage& img, const SvdBasis& basis);

void save_svd_basis(const SvdBasis& basis, const std::string& basename);
SvdBasis load_svd_basis(const std::string& basename);

}  // namespace vloc
