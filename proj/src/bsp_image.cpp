#include "vloc/sig/bsp_image.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "vloc/mesh/laplacian.hpp"
#include "vloc/sig/butterworth.hpp"

namespace vloc {

BSPMatrix normalize_maxabs(const BSPMatrix& bsp) {
    BSPMatrix out = bsp;
    for (int r = 0; r < out.rows(); ++r) {
        const float m = out.row(r).cwiseAbs().maxCoeff();
        if (m > 0.0f) out.row(r) /= m;
    }
    return out;
}

BSPMatrix bandpass(const BSPMatrix& bsp, const FilterSpec& spec) {
    const ButterworthBandpass filt(spec);
    BSPMatrix out = bsp;
    std::vector<float> row(static_cast<size_t>(out.cols()));
    for (int r = 0; r < out.rows(); ++r) {
        for (int c = 0; c < out.cols(); ++c) row[static_cast<size_t>(c)] = out(r, c);
        filt.process_inplace(row.data(), out.cols());
        for (int c = 0; c < out.cols(); ++c) out(r, c) = row[static_cast<size_t>(c)];
    }
    return out;
}

BSPImage arrange_grid(const BSPMatrix& bsp, const ElectrodeLayout& layout) {
    if (bsp.rows() != layout.n_electrodes())
        throw std::runtime_error("arrange_grid: channel count mismatch");
    const int T = static_cast<int>(bsp.cols());
    constexpr int kSlots = ElectrodeLayout::kSlots;

    // Unknown (armpit) slots and the grid Laplacian restricted to them.
    std::vector<int> unknown;
    for (int s = 0; s < kSlots; ++s)
        if (!layout.present[static_cast<size_t>(s)]) unknown.push_back(s);
    std::vector<int> sub(kSlots, -1);
    for (size_t i = 0; i < unknown.size(); ++i) sub[static_cast<size_t>(unknown[i])] = static_cast<int>(i);

    const Graph grid = grid_graph(ElectrodeLayout::kRows, ElectrodeLayout::kCols, true);
    const int nu = static_cast<int>(unknown.size());
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(nu, nu);
    // rhs couplings: per unknown, list of known neighbor slots
    std::vector<std::vector<int>> known_neighbors(static_cast<size_t>(nu));
    std::vector<double> degree(kSlots, 0.0);
    for (const auto& e : grid.edges) {
        degree[static_cast<size_t>(e[0])] += 1.0;
        degree[static_cast<size_t>(e[1])] += 1.0;
        const int ua = sub[static_cast<size_t>(e[0])], ub = sub[static_cast<size_t>(e[1])];
        if (ua >= 0 && ub >= 0) {
            L(ua, ub) -= 1.0;
            L(ub, ua) -= 1.0;
        } else if (ua >= 0) {
            known_neighbors[static_cast<size_t>(ua)].push_back(e[1]);
        } else if (ub >= 0) {
            known_neighbors[static_cast<size_t>(ub)].push_back(e[0]);
        }
    }
    for (int i = 0; i < nu; ++i) L(i, i) = degree[static_cast<size_t>(unknown[static_cast<size_t>(i)])];
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(L);

    BSPImage img;
    img.values.setZero(kSlots, T);
    // Scatter known channels to their slots.
    std::vector<int> slot_channel(kSlots, -1);
    for (int e = 0; e < layout.n_electrodes(); ++e)
        slot_channel[static_cast<size_t>(layout.slot[static_cast<size_t>(e)])] = e;
    for (int s = 0; s < kSlots; ++s)
        if (slot_channel[static_cast<size_t>(s)] >= 0)
            img.values.row(s) = bsp.row(slot_channel[static_cast<size_t>(s)]);

    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nu, T);
    for (int i = 0; i < nu; ++i)
        for (int ks : known_neighbors[static_cast<size_t>(i)])
            rhs.row(i) += img.values.row(ks).cast<double>();
    const Eigen::MatrixXd x = lu.solve(rhs);
    for (int i = 0; i < nu; ++i)
        img.values.row(unknown[static_cast<size_t>(i)]) = x.row(i).cast<float>();
    return img;
}

BSPImage pad_resample_scalenet(const BSPImage& img) {
    const int T = img.n_samples();
    if (T > 700) throw std::runtime_error("signal-too-long");
    if (T < 1) throw std::runtime_error("pad_resample: empty image");
    BSPImage out;
    out.sample_rate_hz = img.sample_rate_hz / 2.0;
    out.filtered = img.filtered;
    out.normalized = img.normalized;
    out.svd_filtered = img.svd_filtered;
    out.values.resize(img.values.rows(), 350);
    for (int k = 0; k < 350; ++k) {
        const int src = std::min(2 * k, T - 1);  // repeat-pad to 700, take every 2nd
        out.values.col(k) = img.values.col(src);
    }
    return out;
}

BSPImage crop_resample_localizer(const BSPImage& img, double start_ms, double end_ms) {
    const int T = img.n_samples();
    const double dt = 1000.0 / img.sample_rate_hz;
    double lo = std::clamp(start_ms / dt, 0.0, static_cast<double>(T));
    double hi = std::clamp(end_ms / dt, 0.0, static_cast<double>(T));
    if (hi - lo < 1.0) throw std::runtime_error("empty-crop");

    BSPImage out;
    out.sample_rate_hz = img.sample_rate_hz;  // nominal; 125 samples regardless
    out.filtered = img.filtered;
    out.normalized = img.normalized;
    out.svd_filtered = img.svd_filtered;
    out.values.resize(img.values.rows(), 125);
    const double span = hi - lo - 1.0;  // last source index hi-1
    for (int k = 0; k < 125; ++k) {
        const double src = lo + span * k / 124.0;
        const int j0 = std::min(static_cast<int>(src), T - 1);
        const int j1 = std::min(j0 + 1, T - 1);
        const float w = static_cast<float>(src - j0);
        out.values.col(k) = (1.0f - w) * img.values.col(j0) + w * img.values.col(j1);
    }
    return out;
}

}  // namespace vloc
