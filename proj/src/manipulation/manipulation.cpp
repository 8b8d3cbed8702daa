#include "dyst/manipulation/manipulation.hpp"

#include <algorithm>
#include <map>

namespace dyst::manip {

std::string to_string(Axis a) {
  switch (a) {
    case Axis::camera: return "camera";
    case Axis::dynamics: return "dynamics";
    case Axis::both: return "both";
  }
  return "unknown";
}

Axis parse_axis(const std::string& name) {
  if (name == "camera" || name == "cam") return Axis::camera;
  if (name == "dynamics" || name == "dyn") return Axis::dynamics;
  if (name == "both") return Axis::both;
  throw InvalidInput("unknown axis '" + name + "' (expected camera, dynamics or both)");
}

std::vector<int> default_input_frames(int length) {
  if (length < 1) throw InvalidInput("default_input_frames: empty clip");
  if (length == 1) return {0};
  return {0, length / 2, length - 1};
}

namespace {

void validate_source(const LatentSource& s, const scene::MonocularClip& target, int length, const char* what) {
  const std::string name(what);
  switch (s.kind) {
    case SourceKind::self:
      if (target.length() != length && target.length() != 1) {
        throw InvalidInput(name + ": self source needs a target of the output length or a single frame");
      }
      break;
    case SourceKind::frozen:
      if (s.frame < 0 || s.frame >= target.length()) {
        throw InvalidInput(name + ": frozen frame " + std::to_string(s.frame) + " out of range");
      }
      break;
    case SourceKind::external:
      if (s.clip == nullptr) throw InvalidInput(name + ": external source without a clip");
      if (static_cast<int>(s.frames.size()) != length) {
        throw InvalidInput(name + ": external source needs one frame index per output frame");
      }
      for (int f : s.frames) {
        if (f < 0 || f >= s.clip->length()) throw InvalidInput(name + ": external frame index out of range");
      }
      break;
  }
}

LatentOrigin origin_of(const LatentSource& s, const scene::MonocularClip& target, int t) {
  switch (s.kind) {
    case SourceKind::self: return {&target, target.length() == 1 ? 0 : t};
    case SourceKind::frozen: return {&target, s.frame};
    case SourceKind::external: return {s.clip, s.frames[static_cast<std::size_t>(t)]};
  }
  return {};
}

std::vector<int> identity_frames(int n) {
  std::vector<int> f(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) f[static_cast<std::size_t>(i)] = i;
  return f;
}

}  // namespace

void validate_plan(const ManipulationPlan& plan, const scene::MonocularClip& target) {
  if (target.length() < 1) throw InvalidInput("manipulation: empty target clip");
  if (plan.length < 1) throw InvalidInput("manipulation: output length must be positive");
  if (plan.input_frames.empty()) throw InvalidInput("manipulation: no input frames");
  for (int f : plan.input_frames) {
    if (f < 0 || f >= target.length()) throw InvalidInput("manipulation: input frame out of range");
  }
  validate_source(plan.camera, target, plan.length, "camera");
  validate_source(plan.dynamics, target, plan.length, "dynamics");
}

template <typename Scalar>
ManipulationResult execute_plan(const DySTModel<Scalar>& model, const scene::MonocularClip& target,
                                const ManipulationPlan& plan) {
  validate_plan(plan, target);
  const int h = model.config().image_height;
  const int w = model.config().image_width;
  std::vector<Image> inputs;
  for (int f : plan.input_frames) inputs.push_back(target.frames[static_cast<std::size_t>(f)]);
  const auto rep = encode(model, inputs);
  const Matrix<Scalar> z_prime = rep.first_view_tokens();

  // Each distinct (clip, frame) is estimated once.
  std::map<std::pair<const scene::MonocularClip*, int>, ControlLatents<Scalar>> cache;
  auto latents = [&](const LatentOrigin& o) -> const ControlLatents<Scalar>& {
    const auto key = std::make_pair(o.clip, o.frame);
    auto it = cache.find(key);
    if (it == cache.end()) {
      it = cache.emplace(key, estimate_controls(model, o.clip->frames[static_cast<std::size_t>(o.frame)], z_prime))
               .first;
    }
    return it->second;
  };

  ManipulationResult result;
  for (int t = 0; t < plan.length; ++t) {
    const LatentOrigin co = origin_of(plan.camera, target, t);
    const LatentOrigin dof = origin_of(plan.dynamics, target, t);
    ControlLatents<Scalar> c{latents(co).camera, latents(dof).dynamics};
    result.clip.frames.push_back(render_full(model, c, rep.tokens, h, w));
    result.camera_origin.push_back(co);
    result.dynamics_origin.push_back(dof);
  }
  return result;
}

template <typename Scalar>
scene::MonocularClip resynthesize_clip(const DySTModel<Scalar>& model, const scene::MonocularClip& clip) {
  if (clip.length() < 3) throw InvalidInput("resynthesize_clip: clip must have at least 3 frames");
  ManipulationPlan plan;
  plan.length = clip.length();
  plan.input_frames = default_input_frames(clip.length());
  return execute_plan(model, clip, plan).clip;
}

template <typename Scalar>
scene::MonocularClip freeze_motion(const DySTModel<Scalar>& model, const scene::MonocularClip& clip, Axis which,
                                   int source_frame) {
  if (clip.length() < 3) throw InvalidInput("freeze_motion: clip must have at least 3 frames");
  if (source_frame < 0 || source_frame >= clip.length()) throw InvalidInput("freeze_motion: source frame out of range");
  ManipulationPlan plan;
  plan.length = clip.length();
  plan.input_frames = default_input_frames(clip.length());
  const LatentSource frozen{SourceKind::frozen, source_frame, nullptr, {}};
  if (which == Axis::camera || which == Axis::both) plan.camera = frozen;
  if (which == Axis::dynamics || which == Axis::both) plan.dynamics = frozen;
  return execute_plan(model, clip, plan).clip;
}

template <typename Scalar>
scene::MonocularClip transfer_motion(const DySTModel<Scalar>& model, const scene::MonocularClip& target,
                                     const scene::MonocularClip& source, Axis which) {
  if (source.length() < 1) throw InvalidInput("transfer_motion: empty source clip");
  if (target.length() != 1 && target.length() != source.length()) {
    throw InvalidInput("transfer_motion: target has " + std::to_string(target.length()) + " frames, source has " +
                       std::to_string(source.length()));
  }
  ManipulationPlan plan;
  plan.length = source.length();
  plan.input_frames = default_input_frames(target.length());
  const LatentSource external{SourceKind::external, 0, &source, identity_frames(source.length())};
  if (which == Axis::camera || which == Axis::both) plan.camera = external;
  if (which == Axis::dynamics || which == Axis::both) plan.dynamics = external;
  return execute_plan(model, target, plan).clip;
}

Image contact_sheet(const std::vector<const scene::MonocularClip*>& rows) {
  if (rows.empty()) throw InvalidInput("contact_sheet: no clips");
  int h = 0;
  int w = 0;
  int cols = 0;
  for (const auto* c : rows) {
    if (c == nullptr || c->frames.empty()) throw InvalidInput("contact_sheet: empty clip");
    h = std::max(h, c->frames.front().height);
    w = std::max(w, c->frames.front().width);
    cols = std::max(cols, c->length());
  }
  Image sheet(h * static_cast<int>(rows.size()), w * cols);
  sheet.rgb.setZero();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int t = 0; t < rows[r]->length(); ++t) {
      const Image& f = rows[r]->frames[static_cast<std::size_t>(t)];
      for (int y = 0; y < f.height; ++y) {
        for (int x = 0; x < f.width; ++x) {
          const int sy = static_cast<int>(r) * h + y;
          const int sx = t * w + x;
          sheet.rgb.row(sy * sheet.width + sx) = f.rgb.row(y * f.width + x);
        }
      }
    }
  }
  return sheet;
}

#define DYST_INSTANTIATE(S)                                                                                       \
  template ManipulationResult execute_plan<S>(const DySTModel<S>&, const scene::MonocularClip&,                   \
                                              const ManipulationPlan&);                                           \
  template scene::MonocularClip resynthesize_clip<S>(const DySTModel<S>&, const scene::MonocularClip&);           \
  template scene::MonocularClip freeze_motion<S>(const DySTModel<S>&, const scene::MonocularClip&, Axis, int);    \
  template scene::MonocularClip transfer_motion<S>(const DySTModel<S>&, const scene::MonocularClip&,              \
                                                   const scene::MonocularClip&, Axis);

DYST_INSTANTIATE(float)
DYST_INSTANTIATE(double)

#undef DYST_INSTANTIATE

}  // namespace dyst::manip
