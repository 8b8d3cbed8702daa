#pragma once

#include "dyst/scene/generator.hpp"
#include "dyst/scene/types.hpp"

namespace dyst::scene {

inline constexpr int kInputViews = 3;
inline constexpr int kTargetViews = 4;

/// Four targets covering a 2 x 2 camera x dynamics block, ordered
/// (a,a), (a,b), (b,a), (b,b), plus three distinct inputs drawn from cells
/// that share neither camera nor dynamics with any target. Requires
/// (C - 2) * (D - 2) >= 3.
TrainingExample sample_training_example(const ViewGrid& grid, Rng& rng);

/// Three distinct input frames and four distinct target frames drawn
/// uniformly from a random window of `window` consecutive frames (clamped
/// to the clip length). Labels carry the frame index on both axes.
TrainingExample sample_clip_example(const MonocularClip& clip, Rng& rng, int window);

}  // namespace dyst::scene
