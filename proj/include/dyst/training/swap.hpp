#pragma once

#include <array>
#include <span>
#include <string>

#include "dyst/scene/generator.hpp"
#include "dyst/scene/types.hpp"

namespace dyst::training {

enum class SwapMode { swap, no_swap, swap_50, latent_average };

std::string to_string(SwapMode mode);
SwapMode parse_swap_mode(const std::string& name);

/// Where the control latents for one target come from, as indices into the
/// example's target list. With `average_with_target` the consumer averages
/// the referenced latents with the target's own estimate.
struct LatentSource {
  int camera_view = 0;
  int dynamics_view = 0;
  bool average_with_target = false;
  bool operator==(const LatentSource&) const = default;
};

struct SwapAssignment {
  std::array<LatentSource, 4> sources;
};

/// For a complete 2 x 2 camera x dynamics target block. Target (c1, d1)
/// takes its camera latent from (c1, d2) and its dynamics latent from
/// (c2, d1) under swap; no_swap sources every latent from the target itself;
/// swap_50 flips an independent fair coin per target.
SwapAssignment build_swap_assignment(std::span<const scene::ViewLabel> targets, SwapMode mode, scene::Rng& rng);

/// No-swap assignment for any four targets (monocular clips).
SwapAssignment self_assignment();

/// True when every camera source shares the target's camera but not its
/// dynamics and every dynamics source shares dynamics but not camera.
bool satisfies_swap_invariant(std::span<const scene::ViewLabel> targets, const SwapAssignment& assignment);

}  // namespace dyst::training
