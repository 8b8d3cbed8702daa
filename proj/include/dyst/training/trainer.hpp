#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dyst/model/dyst_model.hpp"
#include "dyst/scene/types.hpp"
#include "dyst/training/checkpoint.hpp"
#include "dyst/training/optimizer.hpp"
#include "dyst/training/train_config.hpp"

namespace dyst::training {

enum class Stream { synthetic, clip };
std::string to_string(Stream s);

struct LogRecord {
  long step = 0;  // optimizer steps completed, including this one
  Stream stream = Stream::synthetic;
  double loss = 0.0;
  double lr = 0.0;
  double grad_norm = 0.0;  // before clipping
  double wall_time = 0.0;  // seconds
};

/// Append-only tab-separated training log.
class TrainingLog {
 public:
  explicit TrainingLog(const std::filesystem::path& path);
  void append(const LogRecord& r);
  static std::vector<LogRecord> read(const std::filesystem::path& path);

 private:
  std::ofstream out_;
};

/// Dataset index for the k-th example drawn from a stream of `size` items:
/// items are visited in a fresh permutation each epoch.
int stream_item(std::uint64_t seed, Stream stream, long k, int size);

/// The optimisation loop. Every random choice of the k-th example of a
/// stream (which item, which views, which pixels, swap coins) is seeded by
/// (seed, stream, k), so resuming from a checkpoint reproduces an
/// uninterrupted run exactly.
class Trainer {
 public:
  Trainer(const ModelConfig& model_config, const TrainConfig& config, std::span<const scene::ViewGrid> grids,
          std::span<const scene::MonocularClip> clips, std::uint64_t init_seed);
  Trainer(const Checkpoint& ckpt, std::span<const scene::ViewGrid> grids, std::span<const scene::MonocularClip> clips);

  [[nodiscard]] long step() const { return step_; }
  [[nodiscard]] bool done() const { return step_ >= config_.total_steps; }
  DySTModel<float>& model() { return model_; }
  [[nodiscard]] const DySTModel<float>& model() const { return model_; }
  [[nodiscard]] const TrainConfig& config() const { return config_; }

  /// Stream used by the next optimizer step: grids unless co-training
  /// (alternating, grids first) or no grids are available.
  [[nodiscard]] Stream next_stream() const;

  /// One optimizer step on the given stream. Throws NumericalError on a
  /// non-finite loss, leaving parameters untouched.
  LogRecord train_step(Stream stream);
  LogRecord train_step() { return train_step(next_stream()); }

  /// A synthetic step followed by a clip step.
  std::pair<LogRecord, LogRecord> co_train_step();

  /// Mean loss over the batch for the given stream at its current position
  /// without updating anything.
  double evaluate_batch(Stream stream) const;

  [[nodiscard]] Checkpoint checkpoint() const;

  struct Hooks {
    std::function<void(const LogRecord&)> on_log;
    std::function<void(const Checkpoint&)> on_checkpoint;
  };
  /// Runs until total_steps, logging every log_every steps and
  /// checkpointing every checkpoint_every steps and at the end.
  void run(const Hooks& hooks);

 private:
  double batch(Stream stream, long update, bool backward) const;
  [[nodiscard]] double elapsed() const;

  TrainConfig config_;
  std::span<const scene::ViewGrid> grids_;
  std::span<const scene::MonocularClip> clips_;
  mutable DySTModel<float> model_;
  Adam<float> adam_;
  long step_ = 0;
  long synthetic_updates_ = 0;
  long clip_updates_ = 0;
  double wall_offset_ = 0.0;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace dyst::training
