#include "dyst/io/figures.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "dyst/core/types.hpp"

namespace dyst::io {

Eigen::Vector3f ramp_color(double t) {
  // Piecewise-linear dark blue -> teal -> yellow.
  static constexpr std::array<std::array<float, 3>, 5> stops{{
      {0.10f, 0.05f, 0.30f},
      {0.20f, 0.30f, 0.55f},
      {0.15f, 0.55f, 0.55f},
      {0.45f, 0.80f, 0.35f},
      {0.99f, 0.91f, 0.15f},
  }};
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
  const double pos = t * (stops.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(pos), stops.size() - 2);
  const auto f = static_cast<float>(pos - static_cast<double>(i));
  Eigen::Vector3f c;
  for (int k = 0; k < 3; ++k) c(k) = (1.0f - f) * stops[i][static_cast<std::size_t>(k)] + f * stops[i + 1][static_cast<std::size_t>(k)];
  return c;
}

Image heatmap(const Eigen::MatrixXd& values, int cell) {
  if (values.size() == 0) throw InvalidInput("heatmap: empty matrix");
  if (cell < 1) throw InvalidInput("heatmap: cell size must be positive");
  const double hi = values.maxCoeff();
  Image img(static_cast<int>(values.rows()) * cell, static_cast<int>(values.cols()) * cell);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double v = values(y / cell, x / cell);
      img.rgb.row(y * img.width + x) = ramp_color(hi > 0.0 ? v / hi : 0.0).transpose();
    }
  }
  img.quantize();
  return img;
}

}  // namespace dyst::io
