#include "dyst/scene/types.hpp"

#include <cmath>

namespace dyst::scene {

void CameraPose::validate() const {
  if (!position.allFinite() || !look_at.allFinite() || !std::isfinite(fov_deg)) {
    throw InvalidInput("CameraPose: non-finite coordinates");
  }
  if ((position - look_at).norm() < 1e-12) throw InvalidInput("CameraPose: position equals look_at");
  if (!(fov_deg > 10.0 && fov_deg < 120.0)) throw InvalidInput("CameraPose: fov_deg outside (10, 120)");
}

std::string to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::shift: return "shift";
    case TrajectoryKind::pan: return "pan";
    case TrajectoryKind::zoom: return "zoom";
    case TrajectoryKind::random: return "random";
  }
  throw InvalidInput("unknown trajectory kind");
}

std::string to_string(ObjectShape shape) {
  switch (shape) {
    case ObjectShape::box: return "box";
    case ObjectShape::pyramid: return "pyramid";
    case ObjectShape::cylinder: return "cylinder";
  }
  throw InvalidInput("unknown object shape");
}

TrajectoryKind parse_trajectory_kind(const std::string& name) {
  if (name == "shift") return TrajectoryKind::shift;
  if (name == "pan") return TrajectoryKind::pan;
  if (name == "zoom") return TrajectoryKind::zoom;
  if (name == "random") return TrajectoryKind::random;
  throw InvalidInput("unknown trajectory kind '" + name + "'");
}

const Image& ViewGrid::at(int camera, int dynamics_index) const {
  if (camera < 0 || camera >= camera_count() || dynamics_index < 0 || dynamics_index >= dynamics_count()) {
    throw InvalidInput("ViewGrid::at: index out of range");
  }
  return images[static_cast<std::size_t>(camera) * dynamics.size() + static_cast<std::size_t>(dynamics_index)];
}

}  // namespace dyst::scene
