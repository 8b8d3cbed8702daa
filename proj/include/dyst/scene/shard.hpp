#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dyst/scene/types.hpp"

namespace dyst::scene {

inline constexpr int kShardFormatVersion = 1;

enum class ShardKind : std::uint8_t { grid = 0, clip = 1 };

/// Contents of `<root>/manifest.json`.
struct ShardManifest {
  int format_version = kShardFormatVersion;
  ShardKind kind = ShardKind::grid;
  int count = 0;
  int cameras = 0;   // C, grids only
  int dynamics = 0;  // D, grids only
  int length = 0;    // T, clips only
  int height = 0;
  int width = 0;
  std::uint64_t seed = 0;
  GeneratorConfig generator;
  // Clip generation flags, kept so the shard can be regenerated.
  bool freeze_object = false;
  bool freeze_camera = false;
};

struct Shard {
  ShardManifest manifest;
  std::vector<ViewGrid> grids;
  std::vector<MonocularClip> clips;
};

/// Writes `<root>/manifest.json` and `<root>/scene_<idx>.bin`. The manifest
/// geometry fields are derived from the data; `seed`, `generator` and the
/// freeze flags are taken from `provenance`.
ShardManifest write_shard(std::span<const ViewGrid> scenes, const std::filesystem::path& root,
                          const ShardManifest& provenance);
ShardManifest write_shard(std::span<const MonocularClip> clips, const std::filesystem::path& root,
                          const ShardManifest& provenance);

/// Throws IoError naming the path for missing / corrupt data and
/// VersionError on a format_version mismatch.
ShardManifest read_manifest(const std::filesystem::path& root);
Shard load_shard(const std::filesystem::path& root);

/// Rebuilds the shard described by `manifest` from its seed.
Shard regenerate_shard(const ShardManifest& manifest, int workers = 1);

std::filesystem::path record_path(const std::filesystem::path& root, int index);

/// Reads a directory of numbered .png / .ppm frames in lexicographic order
/// as a clip without ground truth.
MonocularClip import_clip_directory(const std::filesystem::path& dir);

}  // namespace dyst::scene
