#include "dyst/core/image.hpp"

#include <algorithm>
#include <cmath>

namespace dyst {

std::vector<std::uint8_t> Image::to_bytes() const {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(rgb.size()));
  for (Eigen::Index i = 0; i < rgb.size(); ++i) {
    const float v = std::clamp(rgb.data()[i], 0.0f, 1.0f);
    out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
  }
  return out;
}

Image Image::from_bytes(int h, int w, const std::uint8_t* data) {
  Image img(h, w);
  for (Eigen::Index i = 0; i < img.rgb.size(); ++i) img.rgb.data()[i] = static_cast<float>(data[i]) / 255.0f;
  return img;
}

void Image::quantize() {
  for (Eigen::Index i = 0; i < rgb.size(); ++i) {
    const float v = std::clamp(rgb.data()[i], 0.0f, 1.0f);
    rgb.data()[i] = static_cast<float>(std::lround(v * 255.0f)) / 255.0f;
  }
}

}  // namespace dyst
