#pragma once

// Post-hoc control of monocular clips by replacing control latents.

#include <string>
#include <vector>

#include "dyst/model/dyst_model.hpp"
#include "dyst/scene/types.hpp"

namespace dyst::manip {

enum class SourceKind { self, frozen, external };

/// Where one control latent comes from at each output frame t:
///   self      target frame t
///   frozen    target frame `frame` for every t
///   external  `clip` frame `frames[t]`, estimated against the target's
///             first-view tokens
struct LatentSource {
  SourceKind kind = SourceKind::self;
  int frame = 0;
  const scene::MonocularClip* clip = nullptr;
  std::vector<int> frames;
};

struct ManipulationPlan {
  int length = 0;          // output frames
  LatentSource camera;
  LatentSource dynamics;
  std::vector<int> input_frames;  // target frames encoded into the scene tokens
};

enum class Axis { camera, dynamics, both };
std::string to_string(Axis a);
Axis parse_axis(const std::string& name);

/// First, middle and last frame; a single-frame clip uses its only frame.
std::vector<int> default_input_frames(int length);

/// Throws InvalidInput when any referenced frame is out of range, the
/// output length is not positive or a self source cannot index the target.
void validate_plan(const ManipulationPlan& plan, const scene::MonocularClip& target);

/// Which clip and frame a latent was estimated on. Only input clips are
/// ever read; rendered outputs are never fed back.
struct LatentOrigin {
  const scene::MonocularClip* clip = nullptr;
  int frame = 0;
  bool operator==(const LatentOrigin&) const = default;
};

struct ManipulationResult {
  scene::MonocularClip clip;  // frames only
  std::vector<LatentOrigin> camera_origin;    // per output frame
  std::vector<LatentOrigin> dynamics_origin;
};

template <typename Scalar>
ManipulationResult execute_plan(const DySTModel<Scalar>& model, const scene::MonocularClip& target,
                                const ManipulationPlan& plan);

/// Scene tokens from frames {0, T/2, T-1}; frame t from its own latents.
template <typename Scalar>
scene::MonocularClip resynthesize_clip(const DySTModel<Scalar>& model, const scene::MonocularClip& clip);

/// The chosen latent is taken from `source_frame` for every frame; the other
/// tracks each frame.
template <typename Scalar>
scene::MonocularClip freeze_motion(const DySTModel<Scalar>& model, const scene::MonocularClip& clip, Axis which,
                                   int source_frame);

/// Transfers latents of `source` onto `target`. A single-frame target yields
/// one output per source frame; otherwise lengths must agree.
template <typename Scalar>
scene::MonocularClip transfer_motion(const DySTModel<Scalar>& model, const scene::MonocularClip& target,
                                     const scene::MonocularClip& source, Axis which);

/// Frames laid out left to right, one row per clip; clips shorter than the
/// longest are padded with black.
Image contact_sheet(const std::vector<const scene::MonocularClip*>& rows);

}  // namespace dyst::manip
