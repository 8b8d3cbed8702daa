#pragma once

// Human-readable key = value configuration shared by config files, run
// snapshots and checkpoint headers.

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dyst/model/config.hpp"
#include "dyst/scene/types.hpp"
#include "dyst/training/train_config.hpp"

namespace dyst::io {

/// Ordered so that formatted output has a stable key order.
using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines. Blank lines and lines starting with '#' are
/// ignored; keys may not repeat. `source` names the input in errors.
KeyValues parse_key_values(const std::string& text, const std::string& source = "<string>");
KeyValues read_key_values(const std::filesystem::path& path);
std::string format_key_values(const KeyValues& kv);
void write_key_values(const KeyValues& kv, const std::filesystem::path& path);

/// One named, typed slot of a config struct.
struct ConfigField {
  std::string key;  // "<section>.<name>"
  std::string help;
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;  // throws InvalidInput on a malformed value
};

std::vector<ConfigField> fields(ModelConfig& cfg);
std::vector<ConfigField> fields(training::TrainConfig& cfg);
std::vector<ConfigField> fields(scene::GeneratorConfig& cfg);

/// Sets every field named in `kv`. Keys outside `known` raise InvalidInput
/// unless `ignore_unknown`.
void apply(const KeyValues& kv, std::vector<ConfigField>& known, bool ignore_unknown = false);
KeyValues collect(const std::vector<ConfigField>& known);

}  // namespace dyst::io
