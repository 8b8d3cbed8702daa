#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dyst/scene/types.hpp"

namespace dyst::scene {

using Rng = std::mt19937_64;

/// Independent, reproducible stream for item `index` of a dataset seeded
/// with `seed`.
Rng item_rng(std::uint64_t seed, std::uint64_t index);

SceneSpec sample_scene_spec(Rng& rng, const GeneratorConfig& cfg = {});

/// `count` poses along the named motion family, each position perturbed by
/// isotropic Gaussian noise of sigma cfg.camera_noise.
std::vector<CameraPose> sample_camera_trajectory(TrajectoryKind kind, Rng& rng, int count,
                                                 const GeneratorConfig& cfg = {});

/// Random walk starting at `initial`: bounded positional jitter plus a yaw
/// increment drawn uniformly from [-pi/2, pi/2] per step.
std::vector<ObjectPose> sample_object_dynamics(Rng& rng, int count, const ObjectPose& initial,
                                               const GeneratorConfig& cfg = {});

ViewGrid generate_scene(const SceneSpec& spec, Rng& rng, int cameras, int dynamics, Resolution res,
                        const GeneratorConfig& cfg = {});

struct ClipOptions {
  bool freeze_object = false;
  bool freeze_camera = false;
};

MonocularClip generate_monocular_clip(const SceneSpec& spec, Rng& rng, int length, Resolution res,
                                      const GeneratorConfig& cfg = {}, ClipOptions options = {});

/// Scene `i` is a pure function of (seed, i); results are ordered by index
/// regardless of `workers`.
std::vector<ViewGrid> generate_grid_dataset(std::uint64_t seed, int count, int cameras, int dynamics, Resolution res,
                                            const GeneratorConfig& cfg = {}, int workers = 1);

std::vector<MonocularClip> generate_clip_dataset(std::uint64_t seed, int count, int length, Resolution res,
                                                 const GeneratorConfig& cfg = {}, int workers = 1,
                                                 ClipOptions options = {});

}  // namespace dyst::scene
