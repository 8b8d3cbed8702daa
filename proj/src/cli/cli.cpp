#include "dyst/cli/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>

#include "dyst/evaluation/metrics.hpp"
#include "dyst/evaluation/report.hpp"
#include "dyst/io/config_file.hpp"
#include "dyst/io/figures.hpp"
#include "dyst/io/png.hpp"
#include "dyst/manipulation/manipulation.hpp"
#include "dyst/scene/generator.hpp"
#include "dyst/scene/shard.hpp"
#include "dyst/training/checkpoint.hpp"
#include "dyst/training/trainer.hpp"

namespace dyst::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path default_out_root() {
  if (const char* env = std::getenv("DYST_OUT"); env != nullptr && *env != '\0') return env;
  return "runs";
}

/// `<out>/<run>` with the standard subdirectories, owned through a lock
/// file for the lifetime of the object.
class RunDir {
 public:
  RunDir(const fs::path& out_root, const std::string& run) : root_(out_root / run) {
    if (run.empty() || run.find('/') != std::string::npos) throw UsageError("invalid run name '" + run + "'");
    for (const char* sub : {"config", "checkpoints", "logs", "metrics", "figures", "frames"}) {
      std::error_code ec;
      fs::create_directories(root_ / sub, ec);
      if (ec) throw IoError("cannot create " + (root_ / sub).string() + ": " + ec.message());
    }
    lock_ = root_ / ".lock";
    std::FILE* f = std::fopen(lock_.c_str(), "wx");
    if (f == nullptr) throw IoError("run directory " + root_.string() + " is locked (remove " + lock_.string() + " if stale)");
    std::fclose(f);
  }
  ~RunDir() {
    std::error_code ec;
    fs::remove(lock_, ec);
  }
  RunDir(const RunDir&) = delete;
  RunDir& operator=(const RunDir&) = delete;

  [[nodiscard]] fs::path operator/(const std::string& sub) const { return root_ / sub; }
  [[nodiscard]] const fs::path& root() const { return root_; }

 private:
  fs::path root_;
  fs::path lock_;
};

/// Registers one `--name` flag per config field. Values are kept as text so
/// that config-file values can sit underneath.
struct FieldFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void add(CLI::App& app, const std::vector<io::ConfigField>& fields) {
    for (const auto& f : fields) {
      std::string flag = f.key.substr(f.key.find('.') + 1);
      std::replace(flag.begin(), flag.end(), '_', '-');
      options[f.key] = app.add_option("--" + flag, values[f.key], f.help + " [" + f.get() + "]");
    }
  }

  [[nodiscard]] io::KeyValues given() const {
    io::KeyValues kv;
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) kv[key] = values.at(key);
    }
    return kv;
  }
};

struct Configs {
  ModelConfig model;
  training::TrainConfig train;
  scene::GeneratorConfig generator;

  std::vector<io::ConfigField> all() {
    auto out = io::fields(model);
    for (auto& f : io::fields(train)) out.push_back(f);
    for (auto& f : io::fields(generator)) out.push_back(f);
    return out;
  }
};

/// Defaults, then the config file, then explicit flags.
void resolve(Configs& cfg, const std::string& config_file, const FieldFlags& flags, io::KeyValues* extra_out) {
  auto known = cfg.all();
  if (!config_file.empty()) {
    io::KeyValues file = io::read_key_values(config_file);
    io::KeyValues recognised;
    for (const auto& [k, v] : file) {
      const bool is_field = std::any_of(known.begin(), known.end(), [&](const auto& f) { return f.key == k; });
      if (is_field) {
        recognised[k] = v;
      } else if (extra_out != nullptr && k.rfind("run.", 0) == 0) {
        (*extra_out)[k] = v;
      } else {
        throw UsageError("config file " + config_file + ": unknown key '" + k + "'");
      }
    }
    io::apply(recognised, known);
  }
  io::apply(flags.given(), known);
}

void write_snapshot(const RunDir& run, const std::string& command, Configs& cfg, const io::KeyValues& extra) {
  io::KeyValues kv = io::collect(cfg.all());
  for (const auto& [k, v] : extra) kv[k] = v;
  kv["run.command"] = command;
  io::write_key_values(kv, run / "config" / (command + ".cfg"));
}

scene::MonocularClip load_clip(const fs::path& path, int index) {
  if (!fs::exists(path)) throw IoError("clip source not found: " + path.string());
  if (fs::exists(path / "manifest.json")) {
    auto shard = scene::load_shard(path);
    if (shard.manifest.kind != scene::ShardKind::clip) throw UsageError(path.string() + " is not a clip shard");
    if (index < 0 || index >= static_cast<int>(shard.clips.size())) {
      throw UsageError("clip index " + std::to_string(index) + " out of range for " + path.string());
    }
    return shard.clips[static_cast<std::size_t>(index)];
  }
  return scene::import_clip_directory(path);
}

std::vector<scene::ViewGrid> load_grids(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("dataset not found: " + path.string());
  auto shard = scene::load_shard(path);
  if (shard.manifest.kind != scene::ShardKind::grid) throw UsageError(path.string() + " is not a grid shard");
  return std::move(shard.grids);
}

DySTModel<float> load_model(const fs::path& path) {
  const auto ckpt = training::load_checkpoint(path);
  return DySTModel<float>(ckpt.model_config, ckpt.params);
}

std::string frame_name(const std::string& stem, int t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%03d.png", t);
  return stem + buf;
}

void write_frames(const scene::MonocularClip& clip, const fs::path& dir, const std::string& stem) {
  for (int t = 0; t < clip.length(); ++t) {
    Image f = clip.frames[static_cast<std::size_t>(t)];
    f.quantize();
    io::write_png(dir / frame_name(stem, t), f);
  }
}

// ---------------------------------------------------------------------------

struct Common {
  std::string out_root;
  std::string run = "default";
  std::string config_file;
  int workers = 1;
};

void add_common(CLI::App& app, Common& c) {
  c.out_root = default_out_root().string();
  app.add_option("--out", c.out_root, "output root (default: $DYST_OUT or ./runs)");
  app.add_option("--run", c.run, "run name; outputs go to <out>/<run>");
  app.add_option("--config", c.config_file, "key = value config file; flags take precedence");
  app.add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
}

struct GenerateArgs {
  Common common;
  std::string kind = "grid";
  int scenes = 100;
  int cameras = 5;
  int dynamics = 5;
  int length = 16;
  int height = 48;
  int width = 48;
  std::uint64_t seed = 0;
  bool freeze_object = false;
  bool freeze_camera = false;
  std::string output;
};

int cmd_generate(GenerateArgs& a, Configs& cfg, const FieldFlags& flags, std::ostream& out) {
  resolve(cfg, a.common.config_file, flags, nullptr);
  if (a.scenes < 1) throw UsageError("--scenes must be at least 1");
  if (a.kind != "grid" && a.kind != "clip") throw UsageError("--kind must be grid or clip");
  RunDir run(a.common.out_root, a.common.run);
  const fs::path dest = a.output.empty() ? run.root() / "data" / a.kind : fs::path(a.output);
  fs::create_directories(dest);
  scene::ShardManifest prov;
  prov.seed = a.seed;
  prov.generator = cfg.generator;
  prov.freeze_object = a.freeze_object;
  prov.freeze_camera = a.freeze_camera;
  const scene::Resolution res{a.height, a.width};
  scene::ShardManifest m;
  if (a.kind == "grid") {
    const auto grids = scene::generate_grid_dataset(a.seed, a.scenes, a.cameras, a.dynamics, res, cfg.generator,
                                                    a.common.workers);
    m = scene::write_shard(grids, dest, prov);
    out << "wrote " << m.count << " grid scenes (" << m.cameras * m.dynamics << " views each) to " << dest.string()
        << "\n";
  } else {
    const auto clips = scene::generate_clip_dataset(a.seed, a.scenes, a.length, res, cfg.generator, a.common.workers,
                                                    {a.freeze_object, a.freeze_camera});
    m = scene::write_shard(clips, dest, prov);
    out << "wrote " << m.count << " clips (" << m.length << " frames each) to " << dest.string() << "\n";
  }
  write_snapshot(run, "generate-data", cfg,
                 {{"run.kind", a.kind}, {"run.scenes", std::to_string(a.scenes)}, {"run.cameras", std::to_string(a.cameras)},
                  {"run.dynamics", std::to_string(a.dynamics)}, {"run.length", std::to_string(a.length)},
                  {"run.height", std::to_string(a.height)}, {"run.width", std::to_string(a.width)},
                  {"run.seed", std::to_string(a.seed)}, {"run.output", dest.string()},
                  {"run.freeze_object", a.freeze_object ? "true" : "false"},
                  {"run.freeze_camera", a.freeze_camera ? "true" : "false"}});
  return kExitOk;
}

struct TrainArgs {
  Common common;
  std::string data;
  std::string clips;
  std::optional<std::uint64_t> init_seed;
  bool resume = false;
};

int cmd_train(TrainArgs& a, Configs& cfg, const FieldFlags& flags, std::ostream& out) {
  resolve(cfg, a.common.config_file, flags, nullptr);
  if (a.data.empty() && a.clips.empty()) throw UsageError("train needs --data and/or --clips");
  std::vector<scene::ViewGrid> grids;
  std::vector<scene::MonocularClip> clips;
  int h = 0;
  int w = 0;
  if (!a.data.empty()) {
    grids = load_grids(a.data);
    h = grids.front().images.front().height;
    w = grids.front().images.front().width;
  }
  if (!a.clips.empty()) {
    if (!fs::exists(a.clips)) throw IoError("clip dataset not found: " + a.clips);
    auto shard = scene::load_shard(a.clips);
    if (shard.manifest.kind != scene::ShardKind::clip) throw UsageError(a.clips + " is not a clip shard");
    clips = std::move(shard.clips);
    h = clips.front().frames.front().height;
    w = clips.front().frames.front().width;
  }
  // Image size follows the data unless set explicitly.
  const auto given = flags.given();
  if (!given.contains("model.image_height")) cfg.model.image_height = h;
  if (!given.contains("model.image_width")) cfg.model.image_width = w;
  cfg.model.validate();
  cfg.train.validate(cfg.model.image_height, cfg.model.image_width);

  RunDir run(a.common.out_root, a.common.run);
  const std::uint64_t init_seed = a.init_seed.value_or(cfg.train.seed);
  write_snapshot(run, "train", cfg,
                 {{"run.data", a.data}, {"run.clips", a.clips}, {"run.init_seed", std::to_string(init_seed)}});

  const fs::path latest = run / "checkpoints" / "latest.ckpt";
  std::unique_ptr<training::Trainer> trainer;
  if (a.resume && fs::exists(latest)) {
    auto ckpt = training::load_checkpoint(latest);
    ckpt.train_config.total_steps = cfg.train.total_steps;
    trainer = std::make_unique<training::Trainer>(ckpt, grids, clips);
    out << "resuming from step " << trainer->step() << "\n";
  } else {
    trainer = std::make_unique<training::Trainer>(cfg.model, cfg.train, grids, clips, init_seed);
  }
  training::TrainingLog log(run / "logs" / "train.tsv");
  training::Trainer::Hooks hooks;
  hooks.on_log = [&](const training::LogRecord& r) { log.append(r); };
  hooks.on_checkpoint = [&](const training::Checkpoint& c) {
    char name[48];
    std::snprintf(name, sizeof name, "step_%07ld.ckpt", c.step);
    training::save_checkpoint(c, run / "checkpoints" / name);
    training::save_checkpoint(c, latest);
  };
  trainer->run(hooks);
  out << "trained to step " << trainer->step() << "; checkpoint " << latest.string() << "\n";
  return kExitOk;
}

struct EvalArgs {
  Common common;
  std::vector<std::string> checkpoints;
  std::vector<std::string> labels;
  std::string data;
  int scenes = eval::kDefaultScenes;
  std::uint64_t seed = 0;
  double epsilon = eval::kDefaultEpsilon;
};

int cmd_eval(EvalArgs& a, std::ostream& out) {
  if (!a.labels.empty() && a.labels.size() != a.checkpoints.size()) {
    throw UsageError("--label must be given once per --checkpoint");
  }
  const auto grids = load_grids(a.data);
  std::vector<eval::MetricReport> reports;
  std::vector<DySTModel<float>> models;
  for (const auto& path : a.checkpoints) {
    if (!fs::exists(path)) throw IoError("checkpoint not found: " + path);
  }
  RunDir run(a.common.out_root, a.common.run);
  for (std::size_t i = 0; i < a.checkpoints.size(); ++i) {
    const auto ckpt = training::load_checkpoint(a.checkpoints[i]);
    const DySTModel<float> model(ckpt.model_config, ckpt.params);
    eval::MetricReport r;
    r.label = a.labels.empty() ? training::to_string(ckpt.train_config.mode) : a.labels[i];
    for (const auto& other : reports) {
      if (other.label == r.label) r.label += "_" + std::to_string(i);
    }
    r.n_scenes = std::min<int>(a.scenes, static_cast<int>(grids.size()));
    r.recombination = eval::recombination_table(model, grids, r.n_scenes, a.seed, a.common.workers);
    r.camera = eval::contrastiveness(model, grids, r.n_scenes, eval::LatentSpace::camera, a.epsilon, a.seed);
    r.dynamics = eval::contrastiveness(model, grids, r.n_scenes, eval::LatentSpace::dynamics, a.epsilon, a.seed);
    reports.push_back(std::move(r));
  }
  const std::string text = eval::format_report(reports);
  std::ofstream f(run / "metrics" / "report.txt", std::ios::trunc);
  f << text;
  if (!f) throw IoError("cannot write " + (run / "metrics" / "report.txt").string());
  io::KeyValues snap{{"run.data", a.data}, {"run.scenes", std::to_string(a.scenes)}, {"run.seed", std::to_string(a.seed)}};
  for (std::size_t i = 0; i < a.checkpoints.size(); ++i) snap["run.checkpoint." + std::to_string(i)] = a.checkpoints[i];
  io::write_key_values(snap, run / "config" / "eval.cfg");
  out << text;
  return kExitOk;
}

struct AnalyzeArgs {
  Common common;
  std::string checkpoint;
  std::string data;
  std::string space = "camera";
  int component = 0;
  int steps = 5;
  int scenes = eval::kDefaultScenes;
  double range = 2.0;
  std::string clip;
  int clip_index = 0;
  std::uint64_t seed = 0;
};

int cmd_analyze(AnalyzeArgs& a, std::ostream& out) {
  if (a.steps < 1) throw UsageError("--steps must be at least 1");
  const auto space = eval::parse_latent_space(a.space);
  if (!fs::exists(a.checkpoint)) throw IoError("checkpoint not found: " + a.checkpoint);
  const auto model = load_model(a.checkpoint);
  const auto grids = load_grids(a.data);
  RunDir run(a.common.out_root, a.common.run);
  const auto& cfg = model.config();

  // PCA over the latents of every view of the first n scenes.
  const int n = std::min<int>(a.scenes, static_cast<int>(grids.size()));
  std::vector<eval::SceneLatents> lat;
  for (int i = 0; i < n; ++i) {
    const auto ex = eval::evaluation_example(grids[static_cast<std::size_t>(i)], a.seed);
    lat.push_back(eval::extract_latents(model, grids[static_cast<std::size_t>(i)], ex.inputs));
  }
  Eigen::Index rows = 0;
  for (const auto& l : lat) rows += l.space(space).rows();
  Eigen::MatrixXd samples(rows, lat.front().space(space).cols());
  Eigen::Index r0 = 0;
  for (const auto& l : lat) {
    samples.middleRows(r0, l.space(space).rows()) = l.space(space);
    r0 += l.space(space).rows();
  }
  const auto basis = eval::fit_pca(samples);
  if (a.component < 0 || a.component >= basis.rank) {
    throw UsageError("--component " + std::to_string(a.component) + " outside the fitted rank " +
                     std::to_string(basis.rank));
  }
  {
    std::ofstream f(run / "metrics" / ("pca_" + eval::to_string(space) + ".txt"), std::ios::trunc);
    f << "samples = " << samples.rows() << "\ndimension = " << basis.dimension << "\nrank = " << basis.rank << "\n";
    f << "mean = " << basis.mean.transpose() << "\n";
    for (int k = 0; k < basis.rank; ++k) {
      f << "component." << k << ".share = " << basis.explained_share(k) << "\n";
      f << "component." << k << ".vector = " << basis.components.row(k) << "\n";
    }
  }

  // Traversal around the first scene's first evaluation target.
  const auto& g0 = grids.front();
  const auto ex0 = eval::evaluation_example(g0, a.seed);
  const auto rep = encode(model, ex0.inputs);
  auto base = estimate_controls(model, ex0.targets.front(), Matrix<float>(rep.first_view_tokens()));
  const Eigen::VectorXd base_vec =
      (space == eval::LatentSpace::camera ? base.camera : base.dynamics).cast<double>().transpose();
  std::vector<double> offsets;
  for (int s = 0; s < a.steps; ++s) {
    offsets.push_back(a.steps == 1 ? 0.0 : -a.range + 2.0 * a.range * s / (a.steps - 1));
  }
  scene::MonocularClip traversal;
  const auto points = eval::pca_traversal(basis, base_vec, a.component, offsets);
  for (const auto& p : points) {
    auto c = base;
    (space == eval::LatentSpace::camera ? c.camera : c.dynamics) = p.cast<float>().transpose();
    traversal.frames.push_back(render_full(model, c, rep.tokens, cfg.image_height, cfg.image_width));
  }
  const std::string stem = "traversal_" + eval::to_string(space) + "_c" + std::to_string(a.component);
  write_frames(traversal, run / "figures", stem);
  io::write_png(run / "figures" / (stem + "_strip.png"), manip::contact_sheet({&traversal}));

  // Distance heatmaps: a clip's frame-to-frame distances, otherwise every
  // view of the first grid scene.
  std::vector<Image> views;
  Matrix<float> z_prime;
  if (!a.clip.empty()) {
    const auto clip = load_clip(a.clip, a.clip_index);
    std::vector<Image> inputs;
    for (int f : manip::default_input_frames(clip.length())) inputs.push_back(clip.frames[static_cast<std::size_t>(f)]);
    z_prime = encode(model, inputs).first_view_tokens();
    views = clip.frames;
  } else {
    z_prime = rep.first_view_tokens();
    views = g0.images;
  }
  for (auto s : {eval::LatentSpace::camera, eval::LatentSpace::dynamics}) {
    const auto m = eval::latent_distance_matrix(model, views, z_prime, s);
    io::write_png(run / "figures" / ("distance_" + eval::to_string(s) + ".png"), io::heatmap(m));
    std::ofstream f(run / "metrics" / ("distance_" + eval::to_string(s) + ".csv"), std::ios::trunc);
    f << eval::matrix_csv(m);
    out << "mean " << eval::to_string(s) << " distance " << eval::mean_off_diagonal(m) << "\n";
  }
  io::write_key_values({{"run.checkpoint", a.checkpoint}, {"run.data", a.data}, {"run.space", a.space},
                        {"run.component", std::to_string(a.component)}, {"run.steps", std::to_string(a.steps)},
                        {"run.scenes", std::to_string(a.scenes)}, {"run.range", std::to_string(a.range)},
                        {"run.clip", a.clip}, {"run.seed", std::to_string(a.seed)}},
                       run / "config" / "analyze.cfg");
  out << "pca rank " << basis.rank << ", component " << a.component << " share " << basis.explained_share(a.component)
      << "; wrote " << traversal.length() << " traversal frames to " << (run / "figures").string() << "\n";
  return kExitOk;
}

struct ManipulateArgs {
  Common common;
  std::string checkpoint;
  std::string clip;
  int index = 0;
  std::string freeze;
  int source_frame = 0;
  std::string transfer;
  std::string source;
  int source_index = 0;
  std::optional<int> target_frame;
  std::string plan;
};

manip::LatentSource parse_source(const std::string& text, const scene::MonocularClip* external, int length) {
  manip::LatentSource s;
  if (text == "self") return s;
  if (text.rfind("frozen:", 0) == 0) {
    s.kind = manip::SourceKind::frozen;
    try {
      s.frame = std::stoi(text.substr(7));
    } catch (const std::exception&) {
      throw UsageError("plan: bad frozen frame in '" + text + "'");
    }
    return s;
  }
  if (text == "external") {
    if (external == nullptr) throw UsageError("plan: external source requires 'source'");
    s.kind = manip::SourceKind::external;
    s.clip = external;
    for (int t = 0; t < length; ++t) s.frames.push_back(t);
    return s;
  }
  throw UsageError("plan: unknown latent source '" + text + "' (self, frozen:<frame> or external)");
}

int cmd_manipulate(ManipulateArgs& a, std::ostream& out) {
  const int modes = (!a.freeze.empty()) + (!a.transfer.empty()) + (!a.plan.empty());
  if (modes > 1) throw UsageError("choose at most one of --freeze, --transfer, --plan");
  if (!fs::exists(a.checkpoint)) throw IoError("checkpoint not found: " + a.checkpoint);
  const auto model = load_model(a.checkpoint);
  scene::MonocularClip target = load_clip(a.clip, a.index);
  RunDir run(a.common.out_root, a.common.run);

  scene::MonocularClip result;
  std::string stem;
  std::optional<scene::MonocularClip> source;
  if (!a.freeze.empty()) {
    const auto axis = manip::parse_axis(a.freeze);
    result = manip::freeze_motion(model, target, axis, a.source_frame);
    stem = "freeze_" + manip::to_string(axis);
  } else if (!a.transfer.empty()) {
    if (a.source.empty()) throw UsageError("--transfer needs --source");
    source = load_clip(a.source, a.source_index);
    if (a.target_frame) {
      if (*a.target_frame < 0 || *a.target_frame >= target.length()) throw UsageError("--target-frame out of range");
      scene::MonocularClip single;
      single.frames.push_back(target.frames[static_cast<std::size_t>(*a.target_frame)]);
      target = std::move(single);
    }
    const auto axis = manip::parse_axis(a.transfer);
    result = manip::transfer_motion(model, target, *source, axis);
    stem = "transfer_" + manip::to_string(axis);
  } else if (!a.plan.empty()) {
    const auto kv = io::read_key_values(a.plan);
    auto get = [&](const std::string& k, const std::string& def) {
      auto it = kv.find(k);
      return it == kv.end() ? def : it->second;
    };
    for (const auto& [k, v] : kv) {
      static const std::vector<std::string> known{"camera", "dynamics", "inputs", "source", "source_index", "length"};
      if (std::find(known.begin(), known.end(), k) == known.end()) throw UsageError("plan: unknown key '" + k + "'");
    }
    if (kv.contains("source")) source = load_clip(get("source", ""), std::stoi(get("source_index", "0")));
    manip::ManipulationPlan plan;
    plan.length = std::stoi(get("length", std::to_string(source ? source->length() : target.length())));
    plan.camera = parse_source(get("camera", "self"), source ? &*source : nullptr, plan.length);
    plan.dynamics = parse_source(get("dynamics", "self"), source ? &*source : nullptr, plan.length);
    if (kv.contains("inputs")) {
      std::stringstream ss(get("inputs", ""));
      std::string tok;
      while (std::getline(ss, tok, ',')) plan.input_frames.push_back(std::stoi(tok));
    } else {
      plan.input_frames = manip::default_input_frames(target.length());
    }
    result = manip::execute_plan(model, target, plan).clip;
    stem = "plan";
  } else {
    result = manip::resynthesize_clip(model, target);
    stem = "resynth";
  }
  write_frames(result, run / "frames", stem);
  std::vector<const scene::MonocularClip*> rows{&target};
  if (source) rows.push_back(&*source);
  rows.push_back(&result);
  io::write_png(run / "figures" / (stem + "_sheet.png"), manip::contact_sheet(rows));
  io::write_key_values({{"run.checkpoint", a.checkpoint}, {"run.clip", a.clip}, {"run.index", std::to_string(a.index)},
                        {"run.freeze", a.freeze}, {"run.source_frame", std::to_string(a.source_frame)},
                        {"run.transfer", a.transfer}, {"run.source", a.source},
                        {"run.source_index", std::to_string(a.source_index)},
                        {"run.target_frame", a.target_frame ? std::to_string(*a.target_frame) : ""},
                        {"run.plan", a.plan}},
                       run / "config" / "manipulate.cfg");
  out << "wrote " << result.length() << " frames to " << (run / "frames").string() << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamic scene transformer: data generation, training, evaluation and latent manipulation", "dyst"};
  app.require_subcommand(1);
  app.fallthrough(false);

  Configs gen_cfg;
  FieldFlags gen_flags;
  GenerateArgs gen;
  auto* g = app.add_subcommand("generate-data", "write procedural grid or clip shards");
  add_common(*g, gen.common);
  g->add_option("--kind", gen.kind, "grid | clip");
  g->add_option("--scenes", gen.scenes, "number of scenes or clips");
  g->add_option("--cameras", gen.cameras, "cameras per grid scene");
  g->add_option("--dynamics", gen.dynamics, "dynamics states per grid scene");
  g->add_option("--length", gen.length, "frames per clip");
  g->add_option("--height", gen.height, "image height");
  g->add_option("--width", gen.width, "image width");
  g->add_option("--seed", gen.seed, "dataset seed");
  g->add_flag("--freeze-object", gen.freeze_object, "clips: keep the object still");
  g->add_flag("--freeze-camera", gen.freeze_camera, "clips: keep the camera still");
  g->add_option("--output", gen.output, "shard directory (default <out>/<run>/data/<kind>)");
  gen_flags.add(*g, io::fields(gen_cfg.generator));

  Configs train_cfg;
  FieldFlags train_flags;
  TrainArgs train;
  auto* t = app.add_subcommand("train", "train a model on grid shards, optionally co-training on clips");
  add_common(*t, train.common);
  t->add_option("--data", train.data, "grid shard directory");
  t->add_option("--clips", train.clips, "clip shard directory");
  t->add_option("--init-seed", train.init_seed, "weight initialisation seed (default: --seed)");
  t->add_flag("--resume", train.resume, "continue from <run>/checkpoints/latest.ckpt when present");
  train_flags.add(*t, io::fields(train_cfg.model));
  train_flags.add(*t, io::fields(train_cfg.train));

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "recombination PSNR and contrastiveness for one or more checkpoints");
  add_common(*e, ev.common);
  e->add_option("--checkpoint", ev.checkpoints, "checkpoint file (repeatable)")->required();
  e->add_option("--label", ev.labels, "report label per checkpoint (repeatable)");
  e->add_option("--data", ev.data, "grid shard directory")->required();
  e->add_option("--scenes", ev.scenes, "scenes to evaluate")->check(CLI::PositiveNumber);
  e->add_option("--seed", ev.seed, "evaluation sampling seed");
  e->add_option("--epsilon", ev.epsilon, "denominator guard")->check(CLI::PositiveNumber);

  AnalyzeArgs an;
  auto* n = app.add_subcommand("analyze", "PCA traversals and latent distance heatmaps");
  add_common(*n, an.common);
  n->add_option("--checkpoint", an.checkpoint, "checkpoint file")->required();
  n->add_option("--data", an.data, "grid shard directory")->required();
  n->add_option("--space", an.space, "camera | dynamics");
  n->add_option("--component", an.component, "principal component to traverse");
  n->add_option("--steps", an.steps, "traversal frames");
  n->add_option("--scenes", an.scenes, "scenes used for the PCA fit")->check(CLI::PositiveNumber);
  n->add_option("--range", an.range, "traversal extent in standard deviations");
  n->add_option("--clip", an.clip, "clip shard or frame directory for the distance heatmap");
  n->add_option("--clip-index", an.clip_index, "clip index within a shard");
  n->add_option("--seed", an.seed, "evaluation sampling seed");

  ManipulateArgs mp;
  auto* m = app.add_subcommand("manipulate", "resynthesise, freeze or transfer motion on a clip");
  add_common(*m, mp.common);
  m->add_option("--checkpoint", mp.checkpoint, "checkpoint file")->required();
  m->add_option("--clip", mp.clip, "clip shard or frame directory")->required();
  m->add_option("--index", mp.index, "clip index within a shard");
  m->add_option("--freeze", mp.freeze, "camera | dynamics");
  m->add_option("--source-frame", mp.source_frame, "frame supplying the frozen latent");
  m->add_option("--transfer", mp.transfer, "camera | dynamics | both");
  m->add_option("--source", mp.source, "clip providing transferred latents");
  m->add_option("--source-index", mp.source_index, "source clip index within a shard");
  m->add_option("--target-frame", mp.target_frame, "use a single target frame");
  m->add_option("--plan", mp.plan, "plan file (camera, dynamics, inputs, source, source_index, length)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    for (auto* sub : app.get_subcommands()) err << sub->help();
    if (app.get_subcommands().empty()) err << app.help();
    return kExitUsage;
  }

  try {
    if (g->parsed()) return cmd_generate(gen, gen_cfg, gen_flags, out);
    if (t->parsed()) return cmd_train(train, train_cfg, train_flags, out);
    if (e->parsed()) return cmd_eval(ev, out);
    if (n->parsed()) return cmd_analyze(an, out);
    if (m->parsed()) return cmd_manipulate(mp, out);
  } catch (const UsageError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const InvalidInput& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace dyst::cli
