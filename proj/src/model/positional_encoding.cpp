#include "dyst/model/positional_encoding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dyst {

template <typename Scalar>
Matrix<Scalar> pixel_encoding(const Matrix<Scalar>& coords, int freqs) {
  if (coords.cols() != 2) throw InvalidInput("pixel_encoding: coords must be P x 2");
  Matrix<Scalar> out(coords.rows(), 4 * freqs);
  for (Eigen::Index r = 0; r < coords.rows(); ++r) {
    for (int k = 0; k < freqs; ++k) {
      const Scalar f = static_cast<Scalar>(std::ldexp(std::numbers::pi, k));
      out(r, 4 * k + 0) = std::sin(f * coords(r, 0));
      out(r, 4 * k + 1) = std::cos(f * coords(r, 0));
      out(r, 4 * k + 2) = std::sin(f * coords(r, 1));
      out(r, 4 * k + 3) = std::cos(f * coords(r, 1));
    }
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> grid_encoding(int grid_h, int grid_w, int dim) {
  if (dim % 4 != 0) throw InvalidInput("grid_encoding: dim must be a multiple of 4");
  const int freqs = dim / 4;
  const double top = std::log2(static_cast<double>(std::max({grid_h, grid_w, 2})));
  Matrix<Scalar> out(static_cast<Eigen::Index>(grid_h) * grid_w, dim);
  for (int y = 0; y < grid_h; ++y) {
    for (int x = 0; x < grid_w; ++x) {
      const double u = (x + 0.5) / grid_w;
      const double v = (y + 0.5) / grid_h;
      const Eigen::Index r = static_cast<Eigen::Index>(y) * grid_w + x;
      for (int k = 0; k < freqs; ++k) {
        const double e = freqs > 1 ? top * k / (freqs - 1) : 0.0;
        const double f = std::numbers::pi * std::exp2(e);
        out(r, 4 * k + 0) = static_cast<Scalar>(std::sin(f * u));
        out(r, 4 * k + 1) = static_cast<Scalar>(std::cos(f * u));
        out(r, 4 * k + 2) = static_cast<Scalar>(std::sin(f * v));
        out(r, 4 * k + 3) = static_cast<Scalar>(std::cos(f * v));
      }
    }
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> pixel_centers(int height, int width) {
  Matrix<Scalar> out(static_cast<Eigen::Index>(height) * width, 2);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Eigen::Index r = static_cast<Eigen::Index>(y) * width + x;
      out(r, 0) = static_cast<Scalar>((x + 0.5) / width);
      out(r, 1) = static_cast<Scalar>((y + 0.5) / height);
    }
  }
  return out;
}

template Matrix<float> pixel_encoding(const Matrix<float>&, int);
template Matrix<double> pixel_encoding(const Matrix<double>&, int);
template Matrix<float> grid_encoding<float>(int, int, int);
template Matrix<double> grid_encoding<double>(int, int, int);
template Matrix<float> pixel_centers<float>(int, int);
template Matrix<double> pixel_centers<double>(int, int);

}  // namespace dyst
