#pragma once

#include <optional>
#include <string>

#include "vloc/pipe/evaluate.hpp"

namespace vloc {

// Bundle of trained models + label scaffolds, loaded from one directory
// (scalenet/regnet/classnet checkpoints, coarse mesh, mean heart, optional
// svd basis).
struct ModelBundle {
    nn::Network<float> scalenet, regnet, classnet;
    CoarseMesh coarse;
    HeartModel mean_heart;
    std::optional<SvdBasis> svd;

    static ModelBundle load(const std::string& models_dir, bool with_svd);
};

struct PredictTruth {
    Vec3 point;
    const HeartModel* heart = nullptr;  // geometry to evaluate the error on
};

// Runs the full localization pipeline on one stored BSP image and emits the
// result as JSON: regression coordinates, their mean-shape position, the
// ranked classification solutions and (when the truth is supplied) geodesic
// errors.
std::string predict_json(ModelBundle& models, const BSPImage& image,
                         const std::optional<PredictTruth>& truth);

// Standalone BSP image files: <base>.json {"t_samples": T} + <base>.bin with
// 224 x T float32 samples.
void save_bsp_image(const BSPImage& img, const std::string& basename);
BSPImage load_bsp_image(const std::string& basename);

}  // namespace vloc
