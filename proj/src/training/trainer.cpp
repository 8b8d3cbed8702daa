#include "dyst/training/trainer.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "dyst/scene/generator.hpp"
#include "dyst/scene/sampling.hpp"
#include "dyst/training/loss.hpp"

namespace dyst::training {

namespace {

constexpr std::uint64_t kStreamSalt[2] = {0x5f3759df9e3779b9ULL, 0xc2b2ae3d27d4eb4fULL};

std::uint64_t salt(Stream s) { return kStreamSalt[s == Stream::synthetic ? 0 : 1]; }

}  // namespace

std::string to_string(Stream s) { return s == Stream::synthetic ? "synthetic" : "clip"; }

TrainingLog::TrainingLog(const std::filesystem::path& path) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  out_.open(path, std::ios::app);
  if (!out_) throw IoError("cannot open training log " + path.string());
  if (fresh) out_ << "step\tstream\tloss\tlr\tgrad_norm\twall_time\n";
}

void TrainingLog::append(const LogRecord& r) {
  out_ << r.step << '\t' << to_string(r.stream) << '\t' << std::setprecision(9) << r.loss << '\t' << r.lr << '\t'
       << r.grad_norm << '\t' << std::setprecision(4) << std::fixed << r.wall_time << std::defaultfloat << '\n';
  out_.flush();
  if (!out_) throw IoError("training log write failed");
}

std::vector<LogRecord> TrainingLog::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read training log " + path.string());
  std::vector<LogRecord> out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    LogRecord r;
    std::string stream;
    if (!(row >> r.step >> stream >> r.loss >> r.lr >> r.grad_norm >> r.wall_time)) {
      throw IoError("malformed training log row in " + path.string() + ": " + line);
    }
    r.stream = stream == "clip" ? Stream::clip : Stream::synthetic;
    out.push_back(r);
  }
  return out;
}

int stream_item(std::uint64_t seed, Stream stream, long k, int size) {
  if (size <= 0) throw InvalidInput("stream_item: empty stream");
  const long epoch = k / size;
  std::vector<int> order(static_cast<std::size_t>(size));
  std::iota(order.begin(), order.end(), 0);
  scene::Rng rng = scene::item_rng(seed ^ salt(stream), static_cast<std::uint64_t>(epoch) | (1ULL << 63));
  std::shuffle(order.begin(), order.end(), rng);
  return order[static_cast<std::size_t>(k % size)];
}

Trainer::Trainer(const ModelConfig& model_config, const TrainConfig& config, std::span<const scene::ViewGrid> grids,
                 std::span<const scene::MonocularClip> clips, std::uint64_t init_seed)
    : config_(config),
      grids_(grids),
      clips_(clips),
      model_(model_config, init_seed),
      adam_(config.adam_beta1, config.adam_beta2, config.adam_eps),
      start_(std::chrono::steady_clock::now()) {
  config_.validate(model_config.image_height, model_config.image_width);
  if (grids_.empty() && clips_.empty()) throw InvalidInput("Trainer: no training data");
  if (config_.co_train && (grids_.empty() || clips_.empty())) {
    throw InvalidInput("Trainer: co_train needs both grid and clip data");
  }
  for (const auto& g : grids_) {
    if (!g.images.empty() &&
        (g.images.front().height != model_config.image_height || g.images.front().width != model_config.image_width)) {
      throw InvalidInput("Trainer: grid resolution does not match the model");
    }
  }
  for (const auto& c : clips_) {
    if (!c.frames.empty() &&
        (c.frames.front().height != model_config.image_height || c.frames.front().width != model_config.image_width)) {
      throw InvalidInput("Trainer: clip resolution does not match the model");
    }
  }
}

Trainer::Trainer(const Checkpoint& ckpt, std::span<const scene::ViewGrid> grids,
                 std::span<const scene::MonocularClip> clips)
    : Trainer(ckpt.model_config, ckpt.train_config, grids, clips, 0) {
  model_ = DySTModel<float>(ckpt.model_config, ckpt.params);
  adam_.set_updates(ckpt.adam_updates);
  adam_.first_moments() = ckpt.adam_first;
  adam_.second_moments() = ckpt.adam_second;
  step_ = ckpt.step;
  synthetic_updates_ = ckpt.synthetic_updates;
  clip_updates_ = ckpt.clip_updates;
  wall_offset_ = ckpt.wall_time;
}

double Trainer::elapsed() const {
  return wall_offset_ + std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

Stream Trainer::next_stream() const {
  if (grids_.empty()) return Stream::clip;
  if (!config_.co_train) return Stream::synthetic;
  return step_ % 2 == 0 ? Stream::synthetic : Stream::clip;
}

double Trainer::batch(Stream stream, long update, bool backward) const {
  const int h = model_.config().image_height;
  const int w = model_.config().image_width;
  const int size = static_cast<int>(stream == Stream::synthetic ? grids_.size() : clips_.size());
  if (size == 0) throw InvalidInput("Trainer: stream '" + to_string(stream) + "' has no data");
  LossOptions opts;
  opts.estimator_grad_scale = config_.estimator_grad_scale;
  opts.weight = 1.0 / config_.batch_size;
  opts.backward = backward;
  double total = 0.0;
  for (int b = 0; b < config_.batch_size; ++b) {
    const long k = update * config_.batch_size + b;
    const int item = stream_item(config_.seed, stream, k, size);
    scene::Rng rng = scene::item_rng(config_.seed ^ salt(stream), static_cast<std::uint64_t>(k));
    scene::TrainingExample ex;
    SwapAssignment assignment;
    if (stream == Stream::synthetic) {
      ex = scene::sample_training_example(grids_[static_cast<std::size_t>(item)], rng);
      assignment = build_swap_assignment(ex.target_labels, config_.mode, rng);
    } else {
      ex = scene::sample_clip_example(clips_[static_cast<std::size_t>(item)], rng, config_.clip_window);
      assignment = self_assignment();
    }
    const auto pixels = sample_pixels(rng, h, w, config_.pixels_per_example);
    total += static_cast<double>(nvs_loss(model_, ex, assignment, pixels, opts));
  }
  return total / config_.batch_size;
}

LogRecord Trainer::train_step(Stream stream) {
  auto& params = model_.parameters();
  params.zero_grad();
  long& updates = stream == Stream::synthetic ? synthetic_updates_ : clip_updates_;
  const double loss = batch(stream, updates, true);
  const double norm = clip_gradients(params, config_.grad_clip_norm);
  if (!std::isfinite(norm)) throw NumericalError("non-finite gradient norm at step " + std::to_string(step_ + 1));
  const long t = step_ + 1;
  const double lr = learning_rate(config_, t);
  adam_.step(params, lr);
  ++updates;
  step_ = t;
  return {t, stream, loss, lr, norm, elapsed()};
}

std::pair<LogRecord, LogRecord> Trainer::co_train_step() {
  if (grids_.empty() || clips_.empty()) throw InvalidInput("co_train_step needs both streams");
  LogRecord a = train_step(Stream::synthetic);
  LogRecord b = train_step(Stream::clip);
  return {a, b};
}

double Trainer::evaluate_batch(Stream stream) const {
  return batch(stream, stream == Stream::synthetic ? synthetic_updates_ : clip_updates_, false);
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint c;
  c.model_config = model_.config();
  c.train_config = config_;
  c.step = step_;
  c.synthetic_updates = synthetic_updates_;
  c.clip_updates = clip_updates_;
  c.wall_time = elapsed();
  c.params = model_.parameters();
  c.adam_updates = adam_.updates();
  c.adam_first = adam_.first_moments();
  c.adam_second = adam_.second_moments();
  return c;
}

void Trainer::run(const Hooks& hooks) {
  while (!done()) {
    const LogRecord r = train_step();
    if (hooks.on_log && (r.step % config_.log_every == 0 || done())) hooks.on_log(r);
    const bool periodic = config_.checkpoint_every > 0 && r.step % config_.checkpoint_every == 0;
    if (hooks.on_checkpoint && (periodic || done())) hooks.on_checkpoint(checkpoint());
  }
}

}  // namespace dyst::training
