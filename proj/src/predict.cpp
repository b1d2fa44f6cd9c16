#include "vloc/pipe/predict.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "vloc/core/binio.hpp"
#include "vloc/sig/bsp_image.hpp"

namespace vloc {

namespace fs = std::filesystem;
using nlohmann::json;

ModelBundle ModelBundle::load(const std::string& dir, bool with_svd) {
    ModelBundle m{nn::load_checkpoint(dir + "/scalenet"),
                  nn::load_checkpoint(dir + (with_svd ? "/regnet_svd" : "/regnet")),
                  nn::load_checkpoint(dir + (with_svd ? "/classnet_svd" : "/classnet")),
                  load_coarse_mesh(dir + "/coarse"),
                  load_heart(dir + "/mean_heart"),
                  std::nullopt};
    if (with_svd) m.svd = load_svd_basis(dir + "/svd_basis");
    return m;
}

std::string predict_json(ModelBundle& models, const BSPImage& image,
                         const std::optional<PredictTruth>& truth) {
    const BSPImage padded = pad_resample_scalenet(image);
    nn::Tensor4<float> bounds;
    nn::predict_batch(models.scalenet, padded.values.data(), 1, 1, bounds, 1);
    const int T = image.n_samples();
    const double start = std::clamp(static_cast<double>(bounds.v[0]) * 700.0, 0.0, T - 2.0);
    const double end = std::clamp(static_cast<double>(bounds.v[1]) * 700.0, start + 2.0,
                                  static_cast<double>(T));
    BSPImage crop = crop_resample_localizer(image, start, end);
    if (models.svd) crop = svd_filter(crop, *models.svd);

    nn::Tensor4<float> reg, cls;
    nn::predict_batch(models.regnet, crop.values.data(), 1, 1, reg, 1);
    nn::predict_batch(models.classnet, crop.values.data(), 1, 1, cls, 1);

    VentCoord c;
    c.a = std::clamp<double>(reg.v[0], 0.0, 1.0);
    const double norm = std::sqrt(static_cast<double>(reg.v[1]) * reg.v[1] +
                                  static_cast<double>(reg.v[2]) * reg.v[2]);
    c.r_sin = norm > 1e-6 ? reg.v[1] / norm : 0.0;
    c.r_cos = norm > 1e-6 ? reg.v[2] / norm : 1.0;
    c.m = reg.v[3] > 0.0f ? 1.0 : 0.0;
    c.v = reg.v[4] > 0.0f ? 1.0 : 0.0;
    const SurfacePoint mean_point = coords_to_point(c, models.mean_heart.surf);

    ClassWeights w(models.coarse.n_classes());
    float zmax = cls.v[0];
    for (int k = 1; k < models.coarse.n_classes(); ++k) zmax = std::max(zmax, cls.v[static_cast<size_t>(k)]);
    double denom = 0;
    for (int k = 0; k < models.coarse.n_classes(); ++k) {
        w[k] = std::exp(cls.v[static_cast<size_t>(k)] - zmax);
        denom += w[k];
    }
    w /= static_cast<float>(denom);
    const auto ranked = decode_fuzzy(w, models.coarse, 3);

    json out;
    out["activation_window_ms"] = {start, end};
    out["coords"] = {{"v", c.v}, {"m", c.m}, {"a", c.a}, {"r_sin", c.r_sin}, {"r_cos", c.r_cos}};
    out["point_mm"] = {mean_point.point.x(), mean_point.point.y(), mean_point.point.z()};
    out["ranked"] = json::array();
    for (const auto& sol : ranked) {
        const SurfacePoint sp = coords_to_point(sol.coords, models.mean_heart.surf);
        out["ranked"].push_back(
            {{"score", sol.score},
             {"coords",
              {{"v", sol.coords.v},
               {"m", sol.coords.m},
               {"a", sol.coords.a},
               {"r_sin", sol.coords.r_sin},
               {"r_cos", sol.coords.r_cos}}},
             {"point_mm", {sp.point.x(), sp.point.y(), sp.point.z()}}});
    }
    if (truth && truth->heart) {
        const GeodesicSolver geo(truth->heart->tet);
        const SurfacePoint reg_on_heart = coords_to_point(c, truth->heart->surf);
        json err;
        err["regression_mm"] = geo.distance(truth->point, reg_on_heart.point);
        err["classification_top1_mm"] =
            topk_geodesic_error(ranked, truth->point, *truth->heart, geo, 1);
        err["classification_top3_mm"] =
            topk_geodesic_error(ranked, truth->point, *truth->heart, geo, 3);
        out["geodesic_error_if_truth_given"] = err;
    } else {
        out["geodesic_error_if_truth_given"] = nullptr;
    }
    return out.dump(2);
}

void save_bsp_image(const BSPImage& img, const std::string& basename) {
    json meta;
    meta["format_version"] = 1;
    meta["kind"] = "bsp_image";
    meta["rows"] = img.values.rows();
    meta["t_samples"] = img.values.cols();
    meta["sample_rate_hz"] = img.sample_rate_hz;
    write_text_file(basename + ".json", meta.dump(2));
    std::ofstream bin(basename + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("bsp image: cannot write " + basename);
    std::vector<float> flat(static_cast<size_t>(img.values.size()));
    Eigen::Map<Eigen::MatrixXf>(flat.data(), img.values.rows(), img.values.cols()) = img.values;
    write_array(bin, flat);
}

BSPImage load_bsp_image(const std::string& basename) {
    const json meta = json::parse(read_text_file(basename + ".json"));
    if (meta.at("kind") != "bsp_image") throw std::runtime_error("not a bsp image file");
    const int rows = meta.at("rows"), cols = meta.at("t_samples");
    std::ifstream bin(basename + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("bsp image: cannot open " + basename);
    const auto flat = read_array<float>(bin, static_cast<size_t>(rows) * cols);
    BSPImage img;
    img.values = Eigen::Map<const Eigen::MatrixXf>(flat.data(), rows, cols);
    img.sample_rate_hz = meta.at("sample_rate_hz");
    return img;
}

}  // namespace vloc
