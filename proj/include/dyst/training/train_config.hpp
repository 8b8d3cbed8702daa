#pragma once

#include <cstdint>
#include <string>

#include "dyst/training/swap.hpp"

namespace dyst::training {

struct TrainConfig {
  SwapMode mode = SwapMode::swap;
  int batch_size = 32;
  long total_steps = 20000;
  int pixels_per_example = 1024;  // sampled across the 4 targets
  double lr_init = 1e-4;
  double lr_final = 1.6e-5;
  long warmup_steps = 2500;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip_norm = 0.1;
  double estimator_grad_scale = 0.2;
  bool co_train = false;
  int clip_window = 64;
  std::uint64_t seed = 0;
  long checkpoint_every = 1000;
  long log_every = 1;

  /// Checks the documented invariants against an H x W target size.
  void validate(int height, int width) const;
};

/// Linear warmup from 0 to lr_init over warmup_steps, then cosine decay to
/// lr_final at total_steps; lr_final afterwards.
double learning_rate(const TrainConfig& cfg, long step);

}  // namespace dyst::training
