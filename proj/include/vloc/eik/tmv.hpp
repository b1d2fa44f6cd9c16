#pragma once

#include <Eigen/Dense>
#include <vector>

#include "vloc/eik/ap_template.hpp"

namespace vloc {

// Transmembrane voltages, nodes x time samples at 1 kHz, in mV.
using TMVMatrix = Eigen::MatrixXf;

// Row i, sample k = template(k * 1ms - at[i]).
TMVMatrix synthesize_tmv(const std::vector<double>& at_surface_nodes, const APTemplate& tpl,
                         int duration_ms);

}  // namespace vloc
