#include "dyst/io/config_file.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace dyst::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw InvalidInput("config: bad value '" + text + "' for " + key);
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw InvalidInput("config: bad boolean '" + text + "' for " + key);
}

template <typename T>
std::string format_number(T v) {
  if constexpr (std::is_floating_point_v<T>) {
    // Shortest text that parses back to the same value.
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
  } else {
    return std::to_string(v);
  }
}

template <typename T>
ConfigField number(std::string key, T* slot, std::string help) {
  return {key, std::move(help), [slot] { return format_number(*slot); },
          [slot, key](const std::string& t) { *slot = parse_number<T>(key, t); }};
}

ConfigField boolean(std::string key, bool* slot, std::string help) {
  return {key, std::move(help), [slot] { return std::string(*slot ? "true" : "false"); },
          [slot, key](const std::string& t) { *slot = parse_bool(key, t); }};
}

}  // namespace

KeyValues parse_key_values(const std::string& text, const std::string& source) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InvalidInput(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw InvalidInput(source + ":" + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second) {
      throw InvalidInput(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str(), path.string());
}

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

void write_key_values(const KeyValues& kv, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_key_values(kv);
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<ConfigField> fields(ModelConfig& c) {
  return {
      number("model.image_height", &c.image_height, "input and target image height"),
      number("model.image_width", &c.image_width, "input and target image width"),
      number("model.enc_cnn_layers", &c.enc_cnn_layers, "encoder CNN depth"),
      number("model.enc_cnn_channels", &c.enc_cnn_channels, "encoder CNN width"),
      number("model.enc_patch", &c.enc_patch, "encoder downsampling factor"),
      number("model.token_dim", &c.token_dim, "token width"),
      number("model.enc_layers", &c.enc_layers, "encoder transformer blocks"),
      number("model.heads", &c.heads, "attention heads"),
      number("model.mlp_hidden", &c.mlp_hidden, "transformer MLP width"),
      number("model.est_cnn_layers", &c.est_cnn_layers, "estimator CNN depth"),
      number("model.est_cnn_channels", &c.est_cnn_channels, "estimator CNN width"),
      number("model.est_patch", &c.est_patch, "estimator downsampling factor"),
      number("model.est_layers", &c.est_layers, "estimator transformer blocks"),
      number("model.dec_layers", &c.dec_layers, "decoder blocks"),
      number("model.dec_mlp_hidden", &c.dec_mlp_hidden, "decoder MLP width"),
      number("model.pixel_pe_freqs", &c.pixel_pe_freqs, "pixel positional encoding octaves"),
      number("model.camera_dim", &c.camera_dim, "camera latent width"),
      number("model.dynamics_dim", &c.dynamics_dim, "dynamics latent width"),
  };
}

std::vector<ConfigField> fields(training::TrainConfig& c) {
  std::vector<ConfigField> out{
      {"train.mode", "swap | no_swap | swap_50 | latent_average",
       [&c] { return training::to_string(c.mode); },
       [&c](const std::string& t) { c.mode = training::parse_swap_mode(t); }},
      number("train.batch_size", &c.batch_size, "examples per optimizer step"),
      number("train.total_steps", &c.total_steps, "optimizer steps"),
      number("train.pixels_per_example", &c.pixels_per_example, "pixels rendered per example"),
      number("train.lr_init", &c.lr_init, "peak learning rate"),
      number("train.lr_final", &c.lr_final, "final learning rate"),
      number("train.warmup_steps", &c.warmup_steps, "linear warmup steps"),
      number("train.adam_beta1", &c.adam_beta1, "Adam beta1"),
      number("train.adam_beta2", &c.adam_beta2, "Adam beta2"),
      number("train.adam_eps", &c.adam_eps, "Adam epsilon"),
      number("train.grad_clip_norm", &c.grad_clip_norm, "global gradient norm limit"),
      number("train.estimator_grad_scale", &c.estimator_grad_scale, "gradient factor at the estimator outputs"),
      boolean("train.co_train", &c.co_train, "alternate grid and clip steps"),
      number("train.clip_window", &c.clip_window, "clip frame window"),
      number("train.seed", &c.seed, "training seed"),
      number("train.checkpoint_every", &c.checkpoint_every, "steps between checkpoints (0 = final only)"),
      number("train.log_every", &c.log_every, "steps between log rows"),
  };
  return out;
}

std::vector<ConfigField> fields(scene::GeneratorConfig& c) {
  return {
      number("data.camera_noise", &c.camera_noise, "camera position noise sigma"),
      number("data.random_radius", &c.random_radius, "random-trajectory ball radius"),
      number("data.scene_bounds", &c.scene_bounds, "object position limit"),
      number("data.position_jitter", &c.position_jitter, "object jitter per step"),
      number("data.fov_deg", &c.fov_deg, "camera field of view"),
      number("data.shift_extent", &c.shift_extent, "shift trajectory half-length"),
      number("data.pan_extent", &c.pan_extent, "pan trajectory half-angle"),
      number("data.zoom_far", &c.zoom_far, "zoom start distance"),
      number("data.zoom_near", &c.zoom_near, "zoom end distance"),
      number("data.camera_distance_min", &c.camera_distance_min, "minimum camera distance"),
      number("data.camera_distance_max", &c.camera_distance_max, "maximum camera distance"),
      number("data.supersample", &c.supersample, "supersampling factor"),
  };
}

void apply(const KeyValues& kv, std::vector<ConfigField>& known, bool ignore_unknown) {
  for (const auto& [k, v] : kv) {
    bool hit = false;
    for (auto& f : known) {
      if (f.key == k) {
        f.set(v);
        hit = true;
        break;
      }
    }
    if (!hit && !ignore_unknown) throw InvalidInput("config: unknown key '" + k + "'");
  }
}

KeyValues collect(const std::vector<ConfigField>& known) {
  KeyValues kv;
  for (const auto& f : known) kv[f.key] = f.get();
  return kv;
}

}  // namespace dyst::io
