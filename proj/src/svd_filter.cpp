#include "vloc/sig/svd_filter.hpp"

#include <Eigen/Eigenvalues>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "vloc/core/binio.hpp"

namespace vloc {

using nlohmann::json;

void SvdAccumulator::add(const BSPImage& img) {
    const Eigen::MatrixXd x = axis_ == SvdAxis::Spatial
                                  ? img.values.cast<double>()
                                  : Eigen::MatrixXd(img.values.transpose().cast<double>());
    if (gram_.size() == 0) gram_ = Eigen::MatrixXd::Zero(x.rows(), x.rows());
    if (gram_.rows() != x.rows()) throw std::runtime_error("svd: inconsistent image shape");
    gram_ += x * x.transpose();
    n_ += x.cols();
    for (int c = 0; c < x.cols(); ++c) {
        for (int r = 0; r < x.rows(); ++r) {
            const float v = static_cast<float>(x(r, c));
            const uint32_t bits = *reinterpret_cast<const uint32_t*>(&v);
            hash_ = (hash_ ^ bits) * 0x100000001b3ull;
        }
    }
}

SvdBasis SvdAccumulator::finalize(int k) const {
    const int dim = static_cast<int>(gram_.rows());
    if (dim == 0 || n_ < k) throw std::runtime_error("svd: insufficient training data");
    if (k < 1 || k > dim) throw std::runtime_error("svd: rank out of range");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram_);
    if (eig.info() != Eigen::Success) throw std::runtime_error("svd: eigendecomposition failed");
    // Eigenvalues ascend; take the top k in descending order.
    SvdBasis out;
    out.axis = axis_;
    out.training_hash = hash_;
    out.basis.resize(dim, k);
    out.singular_values.resize(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) {
        const int src = dim - 1 - i;
        out.basis.col(i) = eig.eigenvectors().col(src).cast<float>();
        out.singular_values[static_cast<size_t>(i)] =
            static_cast<float>(std::sqrt(std::max(0.0, eig.eigenvalues()[src])));
    }
    return out;
}

BSPImage svd_filter(const BSPImage& img, const SvdBasis& basis) {
    if (basis.rank() < 1) throw std::runtime_error("svd_filter: empty basis");
    BSPImage out = img;
    if (basis.axis == SvdAxis::Spatial) {
        if (img.values.rows() != basis.basis.rows())
            throw std::runtime_error("svd_filter: lead-count mismatch");
        out.values = basis.basis * (basis.basis.transpose() * img.values);
    } else {
        if (img.values.cols() != basis.basis.rows())
            throw std::runtime_error("svd_filter: sample-count mismatch");
        out.values = (img.values * basis.basis) * basis.basis.transpose();
    }
    out.svd_filtered = true;
    return out;
}

void save_svd_basis(const SvdBasis& basis, const std::string& basename) {
    json manifest;
    manifest["format_version"] = 1;
    manifest["kind"] = "svd_basis";
    manifest["axis"] = basis.axis == SvdAxis::Spatial ? "spatial" : "temporal";
    manifest["dim"] = basis.basis.rows();
    manifest["rank"] = basis.rank();
    manifest["singular_values"] = basis.singular_values;
    char hex[17];
    snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(basis.training_hash));
    manifest["training_hash"] = hex;
    write_text_file(basename + ".json", manifest.dump(2));

    std::ofstream bin(basename + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("svd: cannot write basis");
    std::vector<float> flat(static_cast<size_t>(basis.basis.size()));
    Eigen::Map<Eigen::MatrixXf>(flat.data(), basis.basis.rows(), basis.basis.cols()) = basis.basis;
    write_array(bin, flat);
}

SvdBasis load_svd_basis(const std::string& basename) {
    const json manifest = json::parse(read_text_file(basename + ".json"));
    if (manifest.at("kind") != "svd_basis") throw std::runtime_error("svd: not a basis file");
    SvdBasis out;
    out.axis = manifest.at("axis") == "spatial" ? SvdAxis::Spatial : SvdAxis::Temporal;
    const int dim = manifest.at("dim");
    const int rank = manifest.at("rank");
    out.singular_values = manifest.at("singular_values").get<std::vector<float>>();
    out.training_hash = std::stoull(manifest.at("training_hash").get<std::string>(), nullptr, 16);
    std::ifstream bin(basename + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("svd: cannot open basis");
    const auto flat = read_array<float>(bin, static_cast<size_t>(dim) * rank);
    out.basis = Eigen::Map<const Eigen::MatrixXf>(flat.data(), dim, rank);
    return out;
}

}  // namespace vloc
