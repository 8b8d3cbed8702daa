#pragma once

#include <optional>

#include "dyst/scene/types.hpp"

namespace dyst::scene {

/// Pinhole camera frame derived from a CameraPose; z is up in world space.
struct CameraFrame {
  Vec3 origin;
  Vec3 forward;
  Vec3 right;
  Vec3 up;
  double tan_half_fov = 0.0;
  double aspect = 1.0;  // width / height

  /// Throws InvalidInput for a degenerate pose.
  CameraFrame(const CameraPose& pose, Resolution res);

  /// Continuous pixel coordinates (x right, y down) and camera depth, or
  /// nullopt for points behind the near plane.
  [[nodiscard]] std::optional<Eigen::Vector3d> project(const Vec3& world, Resolution res) const;
  [[nodiscard]] Vec3 ray(double px, double py, Resolution res) const;
};

struct Triangle {
  Vec3 a, b, c;
};

/// World-space triangles of the scene object at the given pose.
std::vector<Triangle> object_mesh(const SceneSpec& spec, const ObjectPose& pose);

struct PixelBounds {
  double min_x, min_y, max_x, max_y;
  [[nodiscard]] double area() const { return (max_x - min_x) * (max_y - min_y); }
};

/// Screen-space bounding box of the projected object vertices, clipped to
/// the image; nullopt when nothing projects in front of the camera.
std::optional<PixelBounds> projected_bounds(const SceneSpec& spec, const CameraPose& camera, const ObjectPose& pose,
                                            Resolution res);

/// Deterministic flat-shaded render of the object over the procedural
/// background, quantised to 8-bit levels.
Image render_view(const SceneSpec& spec, const CameraPose& camera, const ObjectPose& pose, Resolution res,
                  int supersample = 2);

/// Same camera and background with no object.
Image render_background(const SceneSpec& spec, const CameraPose& camera, Resolution res, int supersample = 2);

}  // namespace dyst::scene
