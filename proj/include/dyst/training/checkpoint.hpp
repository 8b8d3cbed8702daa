#pragma once

#include <filesystem>
#include <vector>

#include "dyst/model/config.hpp"
#include "dyst/model/parameters.hpp"
#include "dyst/training/train_config.hpp"

namespace dyst::training {

inline constexpr int kCheckpointFormatVersion = 1;

/// Everything needed to resume training bit-exactly: parameters, Adam
/// moments and the per-stream update counters.
struct Checkpoint {
  ModelConfig model_config;
  TrainConfig train_config;
  long step = 0;
  long synthetic_updates = 0;
  long clip_updates = 0;
  double wall_time = 0.0;
  ParameterSet<float> params;
  long adam_updates = 0;
  std::vector<Matrix<float>> adam_first;   // empty before the first update
  std::vector<Matrix<float>> adam_second;
};

/// Writes to a sibling temporary file and renames it into place, so an
/// existing checkpoint survives a failed write. Throws IoError.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

/// Throws IoError naming the path when missing or corrupt and VersionError
/// on a format mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dyst::training
