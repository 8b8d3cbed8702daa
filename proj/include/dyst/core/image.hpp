#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "dyst/core/types.hpp"

namespace dyst {

/// RGB image in [0,1]; pixel (x, y) lives in row y * width + x.
struct Image {
  using Pixels = Eigen::Matrix<float, Eigen::Dynamic, 3, Eigen::RowMajor>;

  int height = 0;
  int width = 0;
  Pixels rgb;

  Image() = default;
  Image(int h, int w) : height(h), width(w), rgb(Pixels::Zero(static_cast<Eigen::Index>(h) * w, 3)) {}

  [[nodiscard]] Eigen::Index pixel_count() const { return rgb.rows(); }
  [[nodiscard]] auto at(int x, int y) { return rgb.row(static_cast<Eigen::Index>(y) * width + x); }
  [[nodiscard]] auto at(int x, int y) const { return rgb.row(static_cast<Eigen::Index>(y) * width + x); }

  bool operator==(const Image& other) const {
    return height == other.height && width == other.width && rgb == other.rgb;
  }

  /// Interleaved 8-bit RGB, row-major.
  [[nodiscard]] std::vector<std::uint8_t> to_bytes() const;
  static Image from_bytes(int h, int w, const std::uint8_t* data);

  /// Snaps every channel onto the 8-bit lattice k / 255.
  void quantize();
};

}  // namespace dyst
