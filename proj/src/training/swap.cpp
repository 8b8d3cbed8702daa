#include "dyst/training/swap.hpp"

#include <set>

namespace dyst::training {

std::string to_string(SwapMode mode) {
  switch (mode) {
    case SwapMode::swap: return "swap";
    case SwapMode::no_swap: return "no_swap";
    case SwapMode::swap_50: return "swap_50";
    case SwapMode::latent_average: return "latent_average";
  }
  throw InvalidInput("unknown swap mode");
}

SwapMode parse_swap_mode(const std::string& name) {
  if (name == "swap") return SwapMode::swap;
  if (name == "no_swap") return SwapMode::no_swap;
  if (name == "swap_50") return SwapMode::swap_50;
  if (name == "latent_average") return SwapMode::latent_average;
  throw InvalidInput("unknown swap mode '" + name + "'");
}

namespace {

int find_view(std::span<const scene::ViewLabel> targets, int camera, int dynamics) {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i].camera == camera && targets[i].dynamics == dynamics) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

SwapAssignment self_assignment() {
  SwapAssignment a;
  for (int i = 0; i < 4; ++i) a.sources[static_cast<std::size_t>(i)] = {i, i, false};
  return a;
}

SwapAssignment build_swap_assignment(std::span<const scene::ViewLabel> targets, SwapMode mode, scene::Rng& rng) {
  if (targets.size() != 4) throw InvalidInput("build_swap_assignment: expected 4 targets");
  std::set<int> cams;
  std::set<int> dyns;
  for (const auto& t : targets) {
    cams.insert(t.camera);
    dyns.insert(t.dynamics);
  }
  if (cams.size() != 2 || dyns.size() != 2) {
    throw InvalidInput("build_swap_assignment: targets are not a 2x2 camera x dynamics block");
  }
  const int c_lo = *cams.begin(), c_hi = *cams.rbegin();
  const int d_lo = *dyns.begin(), d_hi = *dyns.rbegin();

  SwapAssignment a = self_assignment();
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& t = targets[i];
    const int other_cam = t.camera == c_lo ? c_hi : c_lo;
    const int other_dyn = t.dynamics == d_lo ? d_hi : d_lo;
    const int cam_src = find_view(targets, t.camera, other_dyn);
    const int dyn_src = find_view(targets, other_cam, t.dynamics);
    if (cam_src < 0 || dyn_src < 0) {
      throw InvalidInput("build_swap_assignment: targets are not a complete 2x2 block");
    }
    const LatentSource swapped{cam_src, dyn_src, false};
    switch (mode) {
      case SwapMode::swap: a.sources[i] = swapped; break;
      case SwapMode::no_swap: break;
      case SwapMode::swap_50:
        if (coin(rng)) a.sources[i] = swapped;
        break;
      case SwapMode::latent_average: a.sources[i] = {cam_src, dyn_src, true}; break;
    }
  }
  return a;
}

bool satisfies_swap_invariant(std::span<const scene::ViewLabel> targets, const SwapAssignment& assignment) {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& src = assignment.sources[i];
    const auto& cam = targets[static_cast<std::size_t>(src.camera_view)];
    const auto& dyn = targets[static_cast<std::size_t>(src.dynamics_view)];
    if (cam.camera != targets[i].camera || cam.dynamics == targets[i].dynamics) return false;
    if (dyn.dynamics != targets[i].dynamics || dyn.camera == targets[i].camera) return false;
  }
  return true;
}

}  // namespace dyst::training
