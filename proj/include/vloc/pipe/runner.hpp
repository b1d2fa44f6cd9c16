#pragma once

#include "vloc/pipe/evaluate.hpp"

namespace vloc {

// Training drivers shared by the CLI and the acceptance suite. Checkpoints
// and history CSVs land in out_dir under the given name.

nn::Network<float> train_scalenet(const Config& cfg, const std::string& data_dir,
                                  const std::string& out_dir);

nn::Network<float> train_localizer(const Config& cfg, const std::string& data_dir,
                                   const std::string& out_dir, nn::LossKind kind,
                                   const nn::Network<float>& scalenet, const SvdBasis* svd,
                                   const std::string& name);

// Spatial (or temporal) basis from the training split's cropped images.
SvdBasis compute_svd_basis(const Config& cfg, const std::string& data_dir,
                           const nn::Network<float>& scalenet, int rank);

}  // namespace vloc
