#include "dyst/evaluation/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "dyst/core/parallel.hpp"
#include "dyst/scene/generator.hpp"
#include "dyst/scene/sampling.hpp"

namespace dyst::eval {

double mse(const Image& a, const Image& b) {
  if (a.height != b.height || a.width != b.width) throw InvalidInput("mse: image shapes differ");
  if (a.rgb.size() == 0) throw InvalidInput("mse: empty image");
  return (a.rgb.cast<double>() - b.rgb.cast<double>()).squaredNorm() / static_cast<double>(a.rgb.size());
}

double psnr(const Image& a, const Image& b) {
  const double e = mse(a, b);
  if (e <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / e));
}

std::string to_string(LatentSpace s) { return s == LatentSpace::camera ? "camera" : "dynamics"; }

LatentSpace parse_latent_space(const std::string& name) {
  if (name == "camera" || name == "cam") return LatentSpace::camera;
  if (name == "dynamics" || name == "dyn") return LatentSpace::dynamics;
  throw InvalidInput("unknown latent space '" + name + "' (expected camera or dynamics)");
}

scene::TrainingExample evaluation_example(const scene::ViewGrid& grid, std::uint64_t seed) {
  scene::Rng rng = scene::item_rng(seed ^ 0xe7a1c0ffee5eedULL, grid.spec.seed);
  return scene::sample_training_example(grid, rng);
}

template <typename Scalar>
SceneLatents extract_latents(const DySTModel<Scalar>& model, const scene::ViewGrid& grid,
                             std::span<const Image> inputs) {
  const auto rep = encode(model, inputs);
  const Matrix<Scalar> z_prime = rep.first_view_tokens();
  SceneLatents out;
  out.cameras = grid.camera_count();
  out.dynamics = grid.dynamics_count();
  const int n = out.cameras * out.dynamics;
  out.camera.resize(n, model.config().camera_dim);
  out.dynamics_latents.resize(n, model.config().dynamics_dim);
  for (int i = 0; i < n; ++i) {
    const auto lat = estimate_controls(model, grid.images[static_cast<std::size_t>(i)], z_prime);
    out.camera.row(i) = lat.camera.template cast<double>();
    out.dynamics_latents.row(i) = lat.dynamics.template cast<double>();
  }
  return out;
}

std::vector<ContrastSample> all_triples(int scene_idx, int cameras, int dynamics, LatentSpace space) {
  std::vector<ContrastSample> out;
  for (int c = 0; c < cameras; ++c) {
    for (int d = 0; d < dynamics; ++d) {
      for (int c2 = 0; c2 < cameras; ++c2) {
        if (c2 == c) continue;
        for (int d2 = 0; d2 < dynamics; ++d2) {
          if (d2 == d) continue;
          ContrastSample s;
          s.scene = scene_idx;
          s.reference = {c, d};
          if (space == LatentSpace::camera) {
            s.matching = {c, d2};
            s.non_matching = {c2, d};
          } else {
            s.matching = {c2, d};
            s.non_matching = {c, d2};
          }
          out.push_back(s);
        }
      }
    }
  }
  return out;
}

ContrastivenessReport contrastiveness(std::span<const SceneLatents> scenes, std::span<const ContrastSample> samples,
                                      LatentSpace space, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidInput("contrastiveness: epsilon must be positive");
  ContrastivenessReport r;
  r.space = space;
  std::vector<double> sums(scenes.size(), 0.0);
  std::vector<long> counts(scenes.size(), 0);
  for (const auto& s : samples) {
    if (s.scene < 0 || static_cast<std::size_t>(s.scene) >= scenes.size()) {
      throw InvalidInput("contrastiveness: sample refers to an unknown scene");
    }
    const auto& lat = scenes[static_cast<std::size_t>(s.scene)];
    const auto ref = lat.at(space, s.reference.camera, s.reference.dynamics);
    const double num = (ref - lat.at(space, s.matching.camera, s.matching.dynamics)).norm();
    double den = (ref - lat.at(space, s.non_matching.camera, s.non_matching.dynamics)).norm();
    if (den < epsilon) {
      den = epsilon;
      ++r.guarded;
    }
    const double ratio = num / den;
    r.sample_ratios.push_back(ratio);
    sums[static_cast<std::size_t>(s.scene)] += ratio;
    ++counts[static_cast<std::size_t>(s.scene)];
  }
  r.samples = static_cast<long>(samples.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (counts[i] == 0) continue;
    r.scene_ratios.push_back(sums[i] / static_cast<double>(counts[i]));
    total += r.scene_ratios.back();
  }
  r.ratio = r.scene_ratios.empty() ? 0.0 : total / static_cast<double>(r.scene_ratios.size());
  return r;
}

ContrastivenessReport contrastiveness(std::span<const SceneLatents> scenes, LatentSpace space, double epsilon) {
  std::vector<ContrastSample> samples;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto t = all_triples(static_cast<int>(i), scenes[i].cameras, scenes[i].dynamics, space);
    samples.insert(samples.end(), t.begin(), t.end());
  }
  return contrastiveness(scenes, samples, space, epsilon);
}

namespace {

template <typename Scalar>
std::vector<SceneLatents> latents_for(const DySTModel<Scalar>& model, std::span<const scene::ViewGrid> grids,
                                      int n_scenes, std::uint64_t seed) {
  const int n = n_scenes <= 0 ? static_cast<int>(grids.size()) : std::min<int>(n_scenes, static_cast<int>(grids.size()));
  std::vector<SceneLatents> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& g = grids[static_cast<std::size_t>(i)];
    const auto ex = evaluation_example(g, seed);
    out.push_back(extract_latents(model, g, ex.inputs));
  }
  return out;
}

}  // namespace

template <typename Scalar>
ContrastivenessReport contrastiveness(const DySTModel<Scalar>& model, std::span<const scene::ViewGrid> grids,
                                      int n_scenes, LatentSpace space, double epsilon, std::uint64_t seed) {
  const auto lat = latents_for(model, grids, n_scenes, seed);
  return contrastiveness(lat, space, epsilon);
}

std::string to_string(Recombination r) {
  switch (r) {
    case Recombination::self_self: return "self_self";
    case Recombination::matching_self: return "matching_self";
    case Recombination::self_matching: return "self_matching";
    case Recombination::matching_matching: return "matching_matching";
    case Recombination::wrong_cam_self: return "wrong_cam_self";
    case Recombination::self_wrong_dyn: return "self_wrong_dyn";
  }
  return "unknown";
}

std::pair<scene::ViewLabel, scene::ViewLabel> recombination_sources(Recombination r, scene::ViewLabel t,
                                                                     scene::ViewLabel other) {
  const scene::ViewLabel same_cam{t.camera, other.dynamics};  // y_{d'}^{c}
  const scene::ViewLabel same_dyn{other.camera, t.dynamics};  // y_{d}^{c'}
  switch (r) {
    case Recombination::self_self: return {t, t};
    case Recombination::matching_self: return {same_cam, t};
    case Recombination::self_matching: return {t, same_dyn};
    case Recombination::matching_matching: return {same_cam, same_dyn};
    case Recombination::wrong_cam_self: return {same_dyn, t};
    case Recombination::self_wrong_dyn: return {t, same_cam};
  }
  throw InvalidInput("recombination_sources: unknown pattern");
}

template <typename Scalar>
RecombinationTable recombination_table(const DySTModel<Scalar>& model, std::span<const scene::ViewGrid> grids,
                                       int n_scenes, std::uint64_t seed, int workers) {
  const int n = n_scenes <= 0 ? static_cast<int>(grids.size()) : std::min<int>(n_scenes, static_cast<int>(grids.size()));
  if (n == 0) throw InvalidInput("recombination_table: no scenes");
  const int h = model.config().image_height;
  const int w = model.config().image_width;
  using Sums = std::array<double, kRecombinationCount>;
  std::vector<Sums> per_scene(static_cast<std::size_t>(n));
  parallel_for(n, workers, [&](int i) {
    const auto& g = grids[static_cast<std::size_t>(i)];
    const auto ex = evaluation_example(g, seed);
    const auto rep = encode(model, ex.inputs);
    const Matrix<Scalar> z_prime = rep.first_view_tokens();
    // Latents are estimated once per distinct cell of the 2 x 2 block.
    std::vector<ControlLatents<Scalar>> lat;
    for (const auto& img : ex.targets) lat.push_back(estimate_controls(model, img, z_prime));
    auto slot = [&](scene::ViewLabel v) {
      for (std::size_t k = 0; k < ex.target_labels.size(); ++k) {
        if (ex.target_labels[k] == v) return k;
      }
      throw InvalidInput("recombination_table: source outside the evaluation block");
    };
    Sums sums{};
    for (std::size_t t = 0; t < ex.targets.size(); ++t) {
      const auto label = ex.target_labels[t];
      const auto other = ex.target_labels[3 - t];  // diagonal partner: differs on both axes
      for (int p = 0; p < kRecombinationCount; ++p) {
        const auto [cam_src, dyn_src] = recombination_sources(static_cast<Recombination>(p), label, other);
        ControlLatents<Scalar> c{lat[slot(cam_src)].camera, lat[slot(dyn_src)].dynamics};
        const Image out = render_full(model, c, rep.tokens, h, w);
        sums[static_cast<std::size_t>(p)] += psnr(out, ex.targets[t]);
      }
    }
    per_scene[static_cast<std::size_t>(i)] = sums;
  });
  RecombinationTable table;
  for (const auto& s : per_scene) {
    for (int p = 0; p < kRecombinationCount; ++p) table.psnr[static_cast<std::size_t>(p)] += s[static_cast<std::size_t>(p)];
  }
  table.targets = n * scene::kTargetViews;
  for (auto& v : table.psnr) v /= table.targets;
  return table;
}

Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& latents) {
  const auto n = latents.rows();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      m(i, j) = m(j, i) = (latents.row(i) - latents.row(j)).norm();
    }
  }
  return m;
}

template <typename Scalar>
Eigen::MatrixXd latent_distance_matrix(const DySTModel<Scalar>& model, std::span<const Image> views,
                                       const Matrix<Scalar>& z_prime, LatentSpace space) {
  if (views.size() < 2) throw InvalidInput("latent_distance_matrix: needs at least two views");
  const int dim = space == LatentSpace::camera ? model.config().camera_dim : model.config().dynamics_dim;
  Eigen::MatrixXd lat(static_cast<Eigen::Index>(views.size()), dim);
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto c = estimate_controls(model, views[i], z_prime);
    const auto& v = space == LatentSpace::camera ? c.camera : c.dynamics;
    lat.row(static_cast<Eigen::Index>(i)) = v.template cast<double>();
  }
  return distance_matrix(lat);
}

double mean_off_diagonal(const Eigen::MatrixXd& m) {
  const auto n = m.rows();
  if (n < 2) return 0.0;
  return (m.sum() - m.diagonal().sum()) / static_cast<double>(n * (n - 1));
}

PCABasis fit_pca(const Eigen::MatrixXd& samples) {
  const auto n = samples.rows();
  const auto dim = samples.cols();
  if (dim < 1) throw InvalidInput("fit_pca: zero-dimensional samples");
  if (n < dim + 1) throw InvalidInput("fit_pca: needs at least dim + 1 samples");
  if (!samples.allFinite()) throw InvalidInput("fit_pca: non-finite samples");
  PCABasis b;
  b.dimension = static_cast<int>(dim);
  b.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centred = samples.rowwise() - b.mean.transpose();
  const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw NumericalError("fit_pca: eigendecomposition failed");
  // Eigen orders eigenvalues ascending.
  const Eigen::VectorXd values = es.eigenvalues().reverse();
  const Eigen::MatrixXd vectors = es.eigenvectors().rowwise().reverse();
  const double total = values.cwiseMax(0.0).sum();
  const double tol = std::max(values(0), 0.0) * 1e-10 * static_cast<double>(dim);
  int rank = 0;
  while (rank < dim && values(rank) > tol && values(rank) > 0.0) ++rank;
  b.rank = rank;
  b.components = vectors.leftCols(rank).transpose();
  b.variances = values.head(rank);
  b.explained_share = total > 0.0 ? Eigen::VectorXd(b.variances / total) : Eigen::VectorXd::Zero(rank);
  return b;
}

std::vector<Eigen::VectorXd> pca_traversal(const PCABasis& basis, const Eigen::VectorXd& base, int component,
                                           std::span<const double> offsets) {
  if (component < 0 || component >= basis.rank) throw InvalidInput("pca_traversal: component index out of range");
  if (base.size() != basis.dimension) throw InvalidInput("pca_traversal: base vector dimension mismatch");
  const double sigma = std::sqrt(basis.variances(component));
  const Eigen::VectorXd dir = basis.components.row(component).transpose();
  std::vector<Eigen::VectorXd> out;
  out.reserve(offsets.size());
  for (double o : offsets) out.push_back(base + o * sigma * dir);
  return out;
}

#define DYST_INSTANTIATE(S)                                                                                        \
  template SceneLatents extract_latents<S>(const DySTModel<S>&, const scene::ViewGrid&, std::span<const Image>);  \
  template ContrastivenessReport contrastiveness<S>(const DySTModel<S>&, std::span<const scene::ViewGrid>, int,    \
                                                    LatentSpace, double, std::uint64_t);                          \
  template RecombinationTable recombination_table<S>(const DySTModel<S>&, std::span<const scene::ViewGrid>, int,  \
                                                     std::uint64_t, int);                                         \
  template Eigen::MatrixXd latent_distance_matrix<S>(const DySTModel<S>&, std::span<const Image>,                 \
                                                     const Matrix<S>&, LatentSpace);

DYST_INSTANTIATE(float)
DYST_INSTANTIATE(double)

#undef DYST_INSTANTIATE

}  // namespace dyst::eval
