#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dyst/core/image.hpp"
#include "dyst/core/types.hpp"

namespace dyst::scene {

struct CameraPose {
  Vec3 position = Vec3::Zero();
  Vec3 look_at = Vec3::UnitX();
  double fov_deg = 50.0;

  /// Throws InvalidInput on coincident position / look_at, non-finite
  /// coordinates or fov outside (10, 120).
  void validate() const;
  bool operator==(const CameraPose&) const = default;
};

struct ObjectPose {
  Vec3 position = Vec3::Zero();  // z >= 0, resting on the ground plane
  double yaw = 0.0;              // radians, [0, 2pi)
  bool operator==(const ObjectPose&) const = default;
};

enum class ObjectShape : std::uint8_t { box = 0, pyramid = 1, cylinder = 2 };
enum class TrajectoryKind : std::uint8_t { shift = 0, pan = 1, zoom = 2, random = 3 };

inline constexpr int kShapeCount = 3;
inline constexpr int kTrajectoryKindCount = 4;
inline constexpr int kBackgroundCount = 8;

std::string to_string(TrajectoryKind kind);
std::string to_string(ObjectShape shape);
/// Throws InvalidInput for unknown names.
TrajectoryKind parse_trajectory_kind(const std::string& name);

struct SceneSpec {
  std::uint64_t seed = 0;
  ObjectShape object_shape = ObjectShape::box;
  Vec3 object_color = Vec3::Constant(0.5);
  double object_scale = 1.0;
  int background_id = 0;
  TrajectoryKind trajectory_kind = TrajectoryKind::shift;
  ObjectPose initial_object_pose;
  bool operator==(const SceneSpec&) const = default;
};

struct Resolution {
  int height = 48;
  int width = 48;
  bool operator==(const Resolution&) const = default;
};

/// Tunables of the procedural generator. Defaults are the documented
/// desk-scale choices.
struct GeneratorConfig {
  double camera_noise = 0.05;      // isotropic Gaussian sigma on camera positions
  double random_radius = 1.0;      // ball radius for the `random` family
  double scene_bounds = 2.0;       // |x|, |y| limit for object positions
  double position_jitter = 0.3;    // per-step uniform jitter of the object
  double fov_deg = 50.0;
  double shift_extent = 1.0;       // half-length of the shift segment
  double pan_extent = 0.35;        // half-angle of the pan sweep, radians
  double zoom_far = 6.0;
  double zoom_near = 3.0;
  double camera_distance_min = 4.0;
  double camera_distance_max = 5.0;
  int supersample = 2;
  bool operator==(const GeneratorConfig&) const = default;
};

/// All C x D combinations of camera and dynamics for one scene.
struct ViewGrid {
  SceneSpec spec;
  std::vector<CameraPose> cameras;
  std::vector<ObjectPose> dynamics;
  std::vector<Image> images;  // row-major: images[i * D + j]

  [[nodiscard]] int camera_count() const { return static_cast<int>(cameras.size()); }
  [[nodiscard]] int dynamics_count() const { return static_cast<int>(dynamics.size()); }
  [[nodiscard]] const Image& at(int camera, int dynamics) const;
  bool operator==(const ViewGrid&) const = default;
};

struct MonocularClip {
  std::vector<Image> frames;
  // Ground truth kept for diagnostics; empty for imported footage.
  std::vector<CameraPose> gt_cameras;
  std::vector<ObjectPose> gt_dynamics;

  [[nodiscard]] int length() const { return static_cast<int>(frames.size()); }
  bool operator==(const MonocularClip&) const = default;
};

/// (camera, dynamics) index of a view. For clips both equal the frame index.
struct ViewLabel {
  int camera = 0;
  int dynamics = 0;
  bool operator==(const ViewLabel&) const = default;
};

struct TrainingExample {
  std::vector<Image> inputs;   // 3
  std::vector<ViewLabel> input_labels;
  std::vector<Image> targets;  // 4
  std::vector<ViewLabel> target_labels;
  bool is_synthetic = true;
};

}  // namespace dyst::scene
