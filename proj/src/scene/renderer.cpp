#include "dyst/scene/renderer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Geometry>

namespace dyst::scene {

namespace {

constexpr double kNear = 0.05;
constexpr int kCylinderSegments = 16;

struct Palette {
  Vec3 zenith;
  Vec3 horizon;
  Vec3 ground_a;
  Vec3 ground_b;
  double tile;
};

// Keyed by background_id. Tiles are large so the ground pattern stays
// legible at low resolution.
const std::array<Palette, kBackgroundCount> kPalettes{{
    {{0.25, 0.45, 0.85}, {0.80, 0.88, 0.95}, {0.30, 0.55, 0.25}, {0.85, 0.85, 0.75}, 2.5},
    {{0.10, 0.15, 0.40}, {0.95, 0.60, 0.40}, {0.55, 0.35, 0.20}, {0.90, 0.80, 0.60}, 3.0},
    {{0.45, 0.60, 0.80}, {0.95, 0.95, 0.95}, {0.20, 0.20, 0.25}, {0.70, 0.70, 0.75}, 2.0},
    {{0.30, 0.20, 0.50}, {0.85, 0.70, 0.90}, {0.10, 0.40, 0.45}, {0.85, 0.90, 0.50}, 2.5},
    {{0.60, 0.75, 0.90}, {0.90, 0.95, 1.00}, {0.75, 0.30, 0.25}, {0.95, 0.90, 0.85}, 3.8},
    {{0.05, 0.05, 0.15}, {0.40, 0.45, 0.60}, {0.60, 0.60, 0.20}, {0.20, 0.25, 0.60}, 2.5},
    {{0.50, 0.80, 0.70}, {0.95, 0.95, 0.80}, {0.35, 0.25, 0.50}, {0.75, 0.85, 0.90}, 3.0},
    {{0.70, 0.50, 0.30}, {0.95, 0.85, 0.70}, {0.30, 0.30, 0.30}, {0.90, 0.60, 0.30}, 2.2},
}};

const Vec3 kLight = Vec3(0.4, 0.3, 0.85).normalized();

const Palette& palette(int id) {
  if (id < 0 || id >= kBackgroundCount) throw InvalidInput("background_id out of range");
  return kPalettes[static_cast<std::size_t>(id)];
}

Vec3 background_color(const Palette& pal, const Vec3& origin, const Vec3& dir) {
  if (dir.z() < -1e-6 && origin.z() > 0.0) {
    const double t = -origin.z() / dir.z();
    const Vec3 hit = origin + t * dir;
    const long ix = static_cast<long>(std::floor(hit.x() / pal.tile));
    const long iy = static_cast<long>(std::floor(hit.y() / pal.tile));
    const Vec3 base = ((ix + iy) & 1L) ? pal.ground_a : pal.ground_b;
    // Distance haze toward the horizon colour.
    const double haze = 1.0 - std::exp(-t / 14.0);
    return (1.0 - haze) * base + haze * pal.horizon;
  }
  const double elev = std::clamp(dir.z(), 0.0, 1.0);
  const double w = std::sqrt(elev);
  return (1.0 - w) * pal.horizon + w * pal.zenith;
}

}  // namespace

CameraFrame::CameraFrame(const CameraPose& pose, Resolution res) {
  pose.validate();
  if (res.height <= 0 || res.width <= 0) throw InvalidInput("resolution must be positive");
  origin = pose.position;
  forward = (pose.look_at - pose.position).normalized();
  Vec3 r = forward.cross(Vec3::UnitZ());
  if (r.norm() < 1e-9) throw InvalidInput("camera looks straight up or down");
  right = r.normalized();
  up = right.cross(forward);
  tan_half_fov = std::tan(pose.fov_deg * std::numbers::pi / 360.0);
  aspect = static_cast<double>(res.width) / res.height;
}

std::optional<Eigen::Vector3d> CameraFrame::project(const Vec3& world, Resolution res) const {
  const Vec3 d = world - origin;
  const double z = d.dot(forward);
  if (z < kNear) return std::nullopt;
  const double x_ndc = d.dot(right) / (z * tan_half_fov * aspect);
  const double y_ndc = d.dot(up) / (z * tan_half_fov);
  return Eigen::Vector3d((x_ndc + 1.0) * 0.5 * res.width, (1.0 - y_ndc) * 0.5 * res.height, z);
}

Vec3 CameraFrame::ray(double px, double py, Resolution res) const {
  const double x_ndc = 2.0 * px / res.width - 1.0;
  const double y_ndc = 1.0 - 2.0 * py / res.height;
  return (forward + right * (x_ndc * tan_half_fov * aspect) + up * (y_ndc * tan_half_fov)).normalized();
}

std::vector<Triangle> object_mesh(const SceneSpec& spec, const ObjectPose& pose) {
  std::vector<Vec3> v;
  std::vector<std::array<int, 3>> f;
  switch (spec.object_shape) {
    case ObjectShape::box:
      for (int i = 0; i < 8; ++i) {
        v.emplace_back((i & 1) ? 0.5 : -0.5, (i & 2) ? 0.5 : -0.5, (i & 4) ? 1.0 : 0.0);
      }
      f = {{0, 1, 3}, {0, 3, 2}, {4, 5, 7}, {4, 7, 6}, {0, 1, 5}, {0, 5, 4},
           {2, 3, 7}, {2, 7, 6}, {0, 2, 6}, {0, 6, 4}, {1, 3, 7}, {1, 7, 5}};
      break;
    case ObjectShape::pyramid:
      v = {{-0.5, -0.5, 0.0}, {0.5, -0.5, 0.0}, {0.5, 0.5, 0.0}, {-0.5, 0.5, 0.0}, {0.0, 0.0, 1.0}};
      f = {{0, 1, 2}, {0, 2, 3}, {0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
      break;
    case ObjectShape::cylinder: {
      const int n = kCylinderSegments;
      for (int i = 0; i < n; ++i) {
        const double a = 2.0 * std::numbers::pi * i / n;
        v.emplace_back(0.5 * std::cos(a), 0.5 * std::sin(a), 0.0);
        v.emplace_back(0.5 * std::cos(a), 0.5 * std::sin(a), 1.0);
      }
      const int bottom = static_cast<int>(v.size());
      v.emplace_back(0.0, 0.0, 0.0);
      v.emplace_back(0.0, 0.0, 1.0);
      for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        f.push_back({2 * i, 2 * j, 2 * j + 1});
        f.push_back({2 * i, 2 * j + 1, 2 * i + 1});
        f.push_back({bottom, 2 * i, 2 * j});
        f.push_back({bottom + 1, 2 * i + 1, 2 * j + 1});
      }
      break;
    }
  }
  const Eigen::Matrix3d rot = Eigen::AngleAxisd(pose.yaw, Vec3::UnitZ()).toRotationMatrix();
  std::vector<Triangle> tris;
  tris.reserve(f.size());
  for (const auto& face : f) {
    auto xf = [&](int i) -> Vec3 { return rot * (v[static_cast<std::size_t>(i)] * spec.object_scale) + pose.position; };
    tris.push_back({xf(face[0]), xf(face[1]), xf(face[2])});
  }
  return tris;
}

std::optional<PixelBounds> projected_bounds(const SceneSpec& spec, const CameraPose& camera, const ObjectPose& pose,
                                            Resolution res) {
  const CameraFrame frame(camera, res);
  PixelBounds b{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
                std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  bool any = false;
  for (const auto& t : object_mesh(spec, pose)) {
    for (const Vec3* p : {&t.a, &t.b, &t.c}) {
      auto q = frame.project(*p, res);
      if (!q) continue;
      any = true;
      b.min_x = std::min(b.min_x, q->x());
      b.min_y = std::min(b.min_y, q->y());
      b.max_x = std::max(b.max_x, q->x());
      b.max_y = std::max(b.max_y, q->y());
    }
  }
  if (!any) return std::nullopt;
  b.min_x = std::clamp(b.min_x, 0.0, static_cast<double>(res.width));
  b.max_x = std::clamp(b.max_x, 0.0, static_cast<double>(res.width));
  b.min_y = std::clamp(b.min_y, 0.0, static_cast<double>(res.height));
  b.max_y = std::clamp(b.max_y, 0.0, static_cast<double>(res.height));
  return b;
}

namespace {

Image render_impl(const SceneSpec& spec, const CameraPose& camera, const ObjectPose* pose, Resolution res,
                  int supersample) {
  if (supersample < 1) throw InvalidInput("supersample must be >= 1");
  const Resolution hi{res.height * supersample, res.width * supersample};
  const CameraFrame frame(camera, hi);
  const Palette& pal = palette(spec.background_id);

  const auto n = static_cast<std::size_t>(hi.height) * static_cast<std::size_t>(hi.width);
  std::vector<Vec3> color(n);
  std::vector<double> depth(n, std::numeric_limits<double>::infinity());
  for (int y = 0; y < hi.height; ++y) {
    for (int x = 0; x < hi.width; ++x) {
      color[static_cast<std::size_t>(y) * hi.width + x] =
          background_color(pal, frame.origin, frame.ray(x + 0.5, y + 0.5, hi));
    }
  }

  if (pose != nullptr) {
    const Vec3 centre = pose->position + Vec3(0, 0, 0.5 * spec.object_scale);
    for (const auto& tri : object_mesh(spec, *pose)) {
      auto pa = frame.project(tri.a, hi);
      auto pb = frame.project(tri.b, hi);
      auto pc = frame.project(tri.c, hi);
      if (!pa || !pb || !pc) continue;
      Vec3 normal = (tri.b - tri.a).cross(tri.c - tri.a);
      if (normal.norm() < 1e-12) continue;
      normal.normalize();
      if (normal.dot((tri.a + tri.b + tri.c) / 3.0 - centre) < 0.0) normal = -normal;
      const Vec3 shade = spec.object_color * (0.3 + 0.7 * std::max(0.0, normal.dot(kLight)));

      const double area = (pb->x() - pa->x()) * (pc->y() - pa->y()) - (pb->y() - pa->y()) * (pc->x() - pa->x());
      if (std::abs(area) < 1e-12) continue;
      const int x0 = std::max(0, static_cast<int>(std::floor(std::min({pa->x(), pb->x(), pc->x()}))));
      const int x1 = std::min(hi.width - 1, static_cast<int>(std::ceil(std::max({pa->x(), pb->x(), pc->x()}))));
      const int y0 = std::max(0, static_cast<int>(std::floor(std::min({pa->y(), pb->y(), pc->y()}))));
      const int y1 = std::min(hi.height - 1, static_cast<int>(std::ceil(std::max({pa->y(), pb->y(), pc->y()}))));
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const double sx = x + 0.5;
          const double sy = y + 0.5;
          const double w0 = ((pb->x() - sx) * (pc->y() - sy) - (pb->y() - sy) * (pc->x() - sx)) / area;
          const double w1 = ((pc->x() - sx) * (pa->y() - sy) - (pc->y() - sy) * (pa->x() - sx)) / area;
          const double w2 = 1.0 - w0 - w1;
          if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
          const double z = 1.0 / (w0 / pa->z() + w1 / pb->z() + w2 / pc->z());
          const auto idx = static_cast<std::size_t>(y) * hi.width + x;
          if (z < depth[idx]) {
            depth[idx] = z;
            color[idx] = shade;
          }
        }
      }
    }
  }

  Image img(res.height, res.width);
  const double inv = 1.0 / (supersample * supersample);
  for (int y = 0; y < res.height; ++y) {
    for (int x = 0; x < res.width; ++x) {
      Vec3 acc = Vec3::Zero();
      for (int sy = 0; sy < supersample; ++sy) {
        for (int sx = 0; sx < supersample; ++sx) {
          acc += color[static_cast<std::size_t>(y * supersample + sy) * hi.width + (x * supersample + sx)];
        }
      }
      img.at(x, y) = (acc * inv).cast<float>().transpose();
    }
  }
  img.quantize();
  return img;
}

}  // namespace

Image render_view(const SceneSpec& spec, const CameraPose& camera, const ObjectPose& pose, Resolution res,
                  int supersample) {
  return render_impl(spec, camera, &pose, res, supersample);
}

Image render_background(const SceneSpec& spec, const CameraPose& camera, Resolution res, int supersample) {
  return render_impl(spec, camera, nullptr, res, supersample);
}

}  // namespace dyst::scene
