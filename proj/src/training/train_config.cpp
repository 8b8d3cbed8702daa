#include "dyst/training/train_config.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dyst::training {

void TrainConfig::validate(int height, int width) const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidInput(std::string("TrainConfig: ") + what);
  };
  require(batch_size >= 1, "batch_size must be >= 1");
  require(total_steps >= 1, "total_steps must be >= 1");
  require(pixels_per_example >= 1, "pixels_per_example must be >= 1");
  require(static_cast<long>(pixels_per_example) <= 4L * height * width, "pixels_per_example exceeds 4*H*W");
  require(lr_init > 0.0 && lr_final > 0.0, "learning rates must be positive");
  require(warmup_steps >= 0, "warmup_steps must be >= 0");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0, "adam betas in [0,1)");
  require(adam_eps > 0.0, "adam_eps must be positive");
  require(grad_clip_norm > 0.0, "grad_clip_norm must be positive");
  require(estimator_grad_scale > 0.0 && estimator_grad_scale <= 1.0, "estimator_grad_scale must lie in (0,1]");
  require(clip_window >= 4, "clip_window must be >= 4");
  require(checkpoint_every >= 0 && log_every >= 1, "checkpoint_every >= 0 and log_every >= 1");
}

double learning_rate(const TrainConfig& cfg, long step) {
  if (step < cfg.warmup_steps) return cfg.lr_init * static_cast<double>(step) / static_cast<double>(cfg.warmup_steps);
  const long span = cfg.total_steps - cfg.warmup_steps;
  if (span <= 0 || step >= cfg.total_steps) return step >= cfg.total_steps ? cfg.lr_final : cfg.lr_init;
  const double progress = static_cast<double>(step - cfg.warmup_steps) / static_cast<double>(span);
  return cfg.lr_final + 0.5 * (cfg.lr_init - cfg.lr_final) * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace dyst::training
