#pragma once

#include <span>
#include <vector>

#include "dyst/model/dyst_model.hpp"
#include "dyst/scene/generator.hpp"
#include "dyst/scene/types.hpp"
#include "dyst/training/swap.hpp"

namespace dyst::training {

struct PixelSample {
  int target = 0;  // index into TrainingExample::targets
  int pixel = 0;   // y * W + x
};

/// `count` distinct (target, pixel) pairs, uniform over the 4 * H * W
/// lattice, in ascending order.
std::vector<PixelSample> sample_pixels(scene::Rng& rng, int height, int width, int count);

struct LossOptions {
  /// Gradient multiplier applied where the control latents leave the
  /// estimator.
  double estimator_grad_scale = 1.0;
  /// The recorded loss is multiplied by `weight` before backpropagation.
  double weight = 1.0;
  bool backward = true;
};

/// Mean squared RGB error over the sampled pixels. All four targets'
/// latents are estimated first, recombined per `assignment`, then decoded
/// jointly. With options.backward the weighted gradient is accumulated into
/// the model's parameter gradients. Throws NumericalError on a non-finite
/// loss.
template <typename Scalar>
Scalar nvs_loss(DySTModel<Scalar>& model, const scene::TrainingExample& example, const SwapAssignment& assignment,
                std::span<const PixelSample> pixels, const LossOptions& options = {});

extern template float nvs_loss<float>(DySTModel<float>&, const scene::TrainingExample&, const SwapAssignment&,
                                       std::span<const PixelSample>, const LossOptions&);
extern template double nvs_loss<double>(DySTModel<double>&, const scene::TrainingExample&, const SwapAssignment&,
                                         std::span<const PixelSample>, const LossOptions&);

}  // namespace dyst::training
