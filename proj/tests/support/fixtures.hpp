#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "dyst/model/config.hpp"
#include "dyst/scene/generator.hpp"
#include "dyst/scene/sampling.hpp"

namespace dyst::testkit {

inline scene::ViewGrid micro_grid(std::uint64_t seed = 1, int height = 8, int width = 8) {
  return scene::generate_grid_dataset(seed, 1, 5, 5, {height, width}).front();
}

inline scene::TrainingExample micro_example(std::uint64_t seed = 1) {
  const auto grid = micro_grid(seed);
  scene::Rng rng(seed + 100);
  return scene::sample_training_example(grid, rng);
}

/// Small but non-trivial profile used by tests that exercise the full
/// pipeline at moderate cost.
inline ModelConfig small_config(int size = 16) {
  ModelConfig c;
  c.image_height = size;
  c.image_width = size;
  c.enc_cnn_layers = 2;
  c.enc_cnn_channels = 8;
  c.enc_patch = 4;
  c.token_dim = 16;
  c.enc_layers = 1;
  c.heads = 2;
  c.mlp_hidden = 32;
  c.est_cnn_layers = 3;
  c.est_cnn_channels = 8;
  c.est_patch = 8;
  c.est_layers = 1;
  c.dec_layers = 1;
  c.dec_mlp_hidden = 16;
  c.pixel_pe_freqs = 3;
  c.camera_dim = 4;
  c.dynamics_dim = 4;
  return c;
}

/// Up to `per_tensor` distinct flat indices of a tensor with `size` entries.
inline std::vector<Eigen::Index> sample_indices(std::mt19937_64& rng, Eigen::Index size, int per_tensor) {
  std::vector<Eigen::Index> all(static_cast<std::size_t>(size));
  for (Eigen::Index i = 0; i < size; ++i) all[static_cast<std::size_t>(i)] = i;
  if (size <= per_tensor) return all;
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(per_tensor));
  return all;
}

}  // namespace dyst::testkit
