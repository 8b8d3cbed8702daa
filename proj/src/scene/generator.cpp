#include "dyst/scene/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "dyst/core/parallel.hpp"
#include "dyst/scene/renderer.hpp"

namespace dyst::scene {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const Vec3 kSceneCentre(0.0, 0.0, 0.4);

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

double linspace(int k, int count, double lo, double hi) {
  return count == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / (count - 1);
}

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

Vec3 base_camera_position(Rng& rng, const GeneratorConfig& cfg) {
  const double azimuth = uniform(rng, 0.0, kTwoPi);
  const double elevation = uniform(rng, 18.0, 32.0) * std::numbers::pi / 180.0;
  const double distance = uniform(rng, cfg.camera_distance_min, cfg.camera_distance_max);
  return kSceneCentre + distance * Vec3(std::cos(elevation) * std::cos(azimuth),
                                        std::cos(elevation) * std::sin(azimuth), std::sin(elevation));
}

}  // namespace

Rng item_rng(std::uint64_t seed, std::uint64_t index) { return Rng(splitmix(splitmix(seed) ^ splitmix(index + 1))); }

SceneSpec sample_scene_spec(Rng& rng, const GeneratorConfig& cfg) {
  SceneSpec s;
  s.seed = rng();
  s.object_shape = static_cast<ObjectShape>(std::uniform_int_distribution<int>(0, kShapeCount - 1)(rng));
  s.object_color = Vec3(uniform(rng, 0.1, 0.95), uniform(rng, 0.1, 0.95), uniform(rng, 0.1, 0.95));
  s.object_scale = uniform(rng, 0.8, 1.2);
  s.background_id = std::uniform_int_distribution<int>(0, kBackgroundCount - 1)(rng);
  s.trajectory_kind = static_cast<TrajectoryKind>(std::uniform_int_distribution<int>(0, kTrajectoryKindCount - 1)(rng));
  const double extent = std::min(0.6, cfg.scene_bounds);
  s.initial_object_pose.position = Vec3(uniform(rng, -extent, extent), uniform(rng, -extent, extent), 0.0);
  s.initial_object_pose.yaw = uniform(rng, 0.0, kTwoPi);
  return s;
}

std::vector<CameraPose> sample_camera_trajectory(TrajectoryKind kind, Rng& rng, int count, const GeneratorConfig& cfg) {
  if (count < 2) throw InvalidInput("sample_camera_trajectory: count must be >= 2");
  const Vec3 base = base_camera_position(rng, cfg);
  const double sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
  const Vec3 forward = (kSceneCentre - base).normalized();
  const Vec3 side = forward.cross(Vec3::UnitZ()).normalized();

  std::vector<CameraPose> poses(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    CameraPose& p = poses[static_cast<std::size_t>(k)];
    p.fov_deg = cfg.fov_deg;
    switch (kind) {
      case TrajectoryKind::shift: {
        const double s = sign * linspace(k, count, -cfg.shift_extent, cfg.shift_extent);
        p.position = base + s * side;
        p.look_at = kSceneCentre + s * side;
        break;
      }
      case TrajectoryKind::pan: {
        const double phi = sign * linspace(k, count, -cfg.pan_extent, cfg.pan_extent);
        p.position = base;
        p.look_at = base + Eigen::AngleAxisd(phi, Vec3::UnitZ()) * (kSceneCentre - base);
        break;
      }
      case TrajectoryKind::zoom: {
        const double dist = linspace(k, count, cfg.zoom_far, cfg.zoom_near);
        p.position = kSceneCentre - forward * dist;
        p.look_at = kSceneCentre;
        break;
      }
      case TrajectoryKind::random: {
        Vec3 offset;
        do {
          offset = Vec3(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0));
        } while (offset.squaredNorm() > 1.0);
        p.position = base + cfg.random_radius * offset;
        p.look_at = kSceneCentre;
        break;
      }
      default:
        throw InvalidInput("sample_camera_trajectory: unknown trajectory kind");
    }
  }
  if (cfg.camera_noise > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.camera_noise);
    for (auto& p : poses) p.position += Vec3(noise(rng), noise(rng), noise(rng));
  }
  return poses;
}

std::vector<ObjectPose> sample_object_dynamics(Rng& rng, int count, const ObjectPose& initial,
                                               const GeneratorConfig& cfg) {
  if (count < 1) throw InvalidInput("sample_object_dynamics: count must be >= 1");
  std::vector<ObjectPose> out{initial};
  std::uniform_real_distribution<double> jitter(-cfg.position_jitter, cfg.position_jitter);
  std::uniform_real_distribution<double> turn(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
  for (int k = 1; k < count; ++k) {
    ObjectPose next = out.back();
    next.position.x() = std::clamp(next.position.x() + jitter(rng), -cfg.scene_bounds, cfg.scene_bounds);
    next.position.y() = std::clamp(next.position.y() + jitter(rng), -cfg.scene_bounds, cfg.scene_bounds);
    next.yaw = wrap_angle(next.yaw + turn(rng));
    out.push_back(next);
  }
  return out;
}

ViewGrid generate_scene(const SceneSpec& spec, Rng& rng, int cameras, int dynamics, Resolution res,
                        const GeneratorConfig& cfg) {
  if (cameras < 2 || dynamics < 2) throw InvalidInput("generate_scene: C and D must be >= 2");
  ViewGrid grid;
  grid.spec = spec;
  grid.cameras = sample_camera_trajectory(spec.trajectory_kind, rng, cameras, cfg);
  grid.dynamics = sample_object_dynamics(rng, dynamics, spec.initial_object_pose, cfg);
  grid.images.reserve(static_cast<std::size_t>(cameras) * dynamics);
  for (const auto& cam : grid.cameras) {
    for (const auto& obj : grid.dynamics) grid.images.push_back(render_view(spec, cam, obj, res, cfg.supersample));
  }
  return grid;
}

MonocularClip generate_monocular_clip(const SceneSpec& spec, Rng& rng, int length, Resolution res,
                                      const GeneratorConfig& cfg, ClipOptions options) {
  if (length < 3) throw InvalidInput("generate_monocular_clip: clips need at least 3 frames");
  MonocularClip clip;
  clip.gt_cameras = sample_camera_trajectory(spec.trajectory_kind, rng, length, cfg);
  if (options.freeze_camera) std::fill(clip.gt_cameras.begin(), clip.gt_cameras.end(), clip.gt_cameras.front());
  clip.gt_dynamics = options.freeze_object
                         ? std::vector<ObjectPose>(static_cast<std::size_t>(length), spec.initial_object_pose)
                         : sample_object_dynamics(rng, length, spec.initial_object_pose, cfg);
  clip.frames.reserve(static_cast<std::size_t>(length));
  for (int t = 0; t < length; ++t) {
    clip.frames.push_back(render_view(spec, clip.gt_cameras[static_cast<std::size_t>(t)],
                                      clip.gt_dynamics[static_cast<std::size_t>(t)], res, cfg.supersample));
  }
  return clip;
}

std::vector<ViewGrid> generate_grid_dataset(std::uint64_t seed, int count, int cameras, int dynamics, Resolution res,
                                            const GeneratorConfig& cfg, int workers) {
  if (count < 1) throw InvalidInput("generate_grid_dataset: count must be >= 1");
  std::vector<ViewGrid> out(static_cast<std::size_t>(count));
  parallel_for(count, workers, [&](int i) {
    Rng rng = item_rng(seed, static_cast<std::uint64_t>(i));
    const SceneSpec spec = sample_scene_spec(rng, cfg);
    out[static_cast<std::size_t>(i)] = generate_scene(spec, rng, cameras, dynamics, res, cfg);
  });
  return out;
}

std::vector<MonocularClip> generate_clip_dataset(std::uint64_t seed, int count, int length, Resolution res,
                                                 const GeneratorConfig& cfg, int workers, ClipOptions options) {
  if (count < 1) throw InvalidInput("generate_clip_dataset: count must be >= 1");
  std::vector<MonocularClip> out(static_cast<std::size_t>(count));
  parallel_for(count, workers, [&](int i) {
    Rng rng = item_rng(seed, static_cast<std::uint64_t>(i));
    const SceneSpec spec = sample_scene_spec(rng, cfg);
    out[static_cast<std::size_t>(i)] = generate_monocular_clip(spec, rng, length, res, cfg, options);
  });
  return out;
}

}  // namespace dyst::scene
