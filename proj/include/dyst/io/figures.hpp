#pragma once

#include <Eigen/Core>

#include "dyst/core/image.hpp"

namespace dyst::io {

/// Matrix rendered as square cells of `cell` pixels on a dark-to-bright
/// ramp scaled to [0, max entry].
Image heatmap(const Eigen::MatrixXd& values, int cell = 8);

/// RGB triple for t in [0, 1] on the heatmap ramp.
Eigen::Vector3f ramp_color(double t);

}  // namespace dyst::io
