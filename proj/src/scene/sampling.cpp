#include "dyst/scene/sampling.hpp"

#include <algorithm>
#include <numeric>

namespace dyst::scene {

namespace {

/// Two distinct values from [0, n), uniformly over unordered pairs.
std::pair<int, int> distinct_pair(Rng& rng, int n) {
  const int a = std::uniform_int_distribution<int>(0, n - 1)(rng);
  int b = std::uniform_int_distribution<int>(0, n - 2)(rng);
  if (b >= a) ++b;
  return {a, b};
}

/// First `k` entries of a uniformly random permutation of `pool`.
template <typename T>
std::vector<T> choose(Rng& rng, std::vector<T> pool, std::size_t k) {
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = std::uniform_int_distribution<std::size_t>(i, pool.size() - 1)(rng);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace

TrainingExample sample_training_example(const ViewGrid& grid, Rng& rng) {
  const int c = grid.camera_count();
  const int d = grid.dynamics_count();
  if (c < 3 || d < 3 || (c - 2) * (d - 2) < kInputViews) {
    throw InvalidInput("sample_training_example: a " + std::to_string(c) + "x" + std::to_string(d) +
                       " grid leaves fewer than 3 input cells outside the target block");
  }
  const auto [ca, cb] = distinct_pair(rng, c);
  const auto [da, db] = distinct_pair(rng, d);

  TrainingExample ex;
  ex.is_synthetic = true;
  for (const ViewLabel l : {ViewLabel{ca, da}, ViewLabel{ca, db}, ViewLabel{cb, da}, ViewLabel{cb, db}}) {
    ex.target_labels.push_back(l);
    ex.targets.push_back(grid.at(l.camera, l.dynamics));
  }
  std::vector<ViewLabel> pool;
  for (int i = 0; i < c; ++i) {
    if (i == ca || i == cb) continue;
    for (int j = 0; j < d; ++j) {
      if (j == da || j == db) continue;
      pool.push_back({i, j});
    }
  }
  ex.input_labels = choose(rng, std::move(pool), kInputViews);
  for (const auto& l : ex.input_labels) ex.inputs.push_back(grid.at(l.camera, l.dynamics));
  return ex;
}

TrainingExample sample_clip_example(const MonocularClip& clip, Rng& rng, int window) {
  const int t = clip.length();
  if (t < kTargetViews) throw InvalidInput("sample_clip_example: clip shorter than 4 frames");
  const int w = std::clamp(window, kTargetViews, t);
  const int start = std::uniform_int_distribution<int>(0, t - w)(rng);
  std::vector<int> frames(static_cast<std::size_t>(w));
  std::iota(frames.begin(), frames.end(), start);

  TrainingExample ex;
  ex.is_synthetic = false;
  for (int f : choose(rng, frames, kInputViews)) {
    ex.input_labels.push_back({f, f});
    ex.inputs.push_back(clip.frames[static_cast<std::size_t>(f)]);
  }
  for (int f : choose(rng, frames, kTargetViews)) {
    ex.target_labels.push_back({f, f});
    ex.targets.push_back(clip.frames[static_cast<std::size_t>(f)]);
  }
  return ex;
}

}  // namespace dyst::scene
