#pragma once

#include "dyst/core/types.hpp"

namespace dyst {

/// Fixed sinusoidal features of normalised (u, v) coordinates, one row per
/// coordinate pair. Output width is 4 * freqs, laid out as
/// [sin(f u), cos(f u), sin(f v), cos(f v)] per frequency f_k = 2^k * pi.
template <typename Scalar>
Matrix<Scalar> pixel_encoding(const Matrix<Scalar>& coords, int freqs);

/// Sinusoidal encoding of a grid_h x grid_w patch lattice with `dim`
/// features (dim % 4 == 0); frequencies span pi .. pi * max(grid_h, grid_w).
template <typename Scalar>
Matrix<Scalar> grid_encoding(int grid_h, int grid_w, int dim);

/// Centres of an h x w pixel lattice as (u, v) in [0,1]^2, row-major order.
template <typename Scalar>
Matrix<Scalar> pixel_centers(int height, int width);

}  // namespace dyst
