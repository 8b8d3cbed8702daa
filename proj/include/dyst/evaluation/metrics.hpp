#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dyst/core/image.hpp"
#include "dyst/model/dyst_model.hpp"
#include "dyst/scene/types.hpp"

namespace dyst::eval {

inline constexpr double kPsnrCap = 99.0;
inline constexpr double kDefaultEpsilon = 1e-8;
inline constexpr int kDefaultScenes = 300;

/// Mean squared error over all pixels and channels; throws InvalidInput on
/// a shape mismatch.
double mse(const Image& a, const Image& b);

/// 10 log10(1 / MSE) in dB, kPsnrCap for identical images.
double psnr(const Image& a, const Image& b);

enum class LatentSpace { camera, dynamics };
std::string to_string(LatentSpace s);
LatentSpace parse_latent_space(const std::string& name);

// ---------------------------------------------------------------------------
// Latent tables. All latents of one scene are estimated against the same
// first-view token set.

/// Control latents for every cell of a C x D grid, row i * D + j.
struct SceneLatents {
  int cameras = 0;
  int dynamics = 0;
  Eigen::MatrixXd camera;
  Eigen::MatrixXd dynamics_latents;

  [[nodiscard]] const Eigen::MatrixXd& space(LatentSpace s) const {
    return s == LatentSpace::camera ? camera : dynamics_latents;
  }
  [[nodiscard]] Eigen::VectorXd at(LatentSpace s, int c, int d) const { return space(s).row(c * dynamics + d).transpose(); }
};

/// Evaluation inputs for a scene: its designated three input views and a
/// 2 x 2 target block, drawn from a stream seeded by (seed, scene seed) so
/// the choice does not depend on where the scene sits in a dataset.
scene::TrainingExample evaluation_example(const scene::ViewGrid& grid, std::uint64_t seed);

template <typename Scalar>
SceneLatents extract_latents(const DySTModel<Scalar>& model, const scene::ViewGrid& grid,
                             std::span<const Image> inputs);

// ---------------------------------------------------------------------------
// Contrastiveness.

/// One reference / matching / non-matching view triple within a scene.
/// `reference`, `matching` and `non_matching` are (camera, dynamics) cells.
struct ContrastSample {
  int scene = 0;
  scene::ViewLabel reference;
  scene::ViewLabel matching;
  scene::ViewLabel non_matching;
};

/// Every valid triple of a C x D grid for the given space: for cam the
/// matching view shares the reference camera (d' != d), the non-matching
/// view shares its dynamics (c' != c); mirrored for dyn.
std::vector<ContrastSample> all_triples(int scene, int cameras, int dynamics, LatentSpace space);

struct ContrastivenessReport {
  LatentSpace space = LatentSpace::camera;
  double ratio = 0.0;                  // mean over scenes of the per-scene mean
  std::vector<double> scene_ratios;    // per scene, mean over its samples
  std::vector<double> sample_ratios;   // one per (scene, triple), in sample order
  long guarded = 0;                    // denominators below epsilon
  long samples = 0;
  [[nodiscard]] double guarded_fraction() const { return samples ? static_cast<double>(guarded) / samples : 0.0; }
};

/// D(ref, matching) / max(D(ref, non_matching), epsilon) per sample,
/// averaged within each scene and then over scenes.
ContrastivenessReport contrastiveness(std::span<const SceneLatents> scenes, std::span<const ContrastSample> samples,
                                      LatentSpace space, double epsilon = kDefaultEpsilon);

/// As above over all valid triples of every scene.
ContrastivenessReport contrastiveness(std::span<const SceneLatents> scenes, LatentSpace space,
                                      double epsilon = kDefaultEpsilon);

template <typename Scalar>
ContrastivenessReport contrastiveness(const DySTModel<Scalar>& model, std::span<const scene::ViewGrid> grids,
                                      int n_scenes, LatentSpace space, double epsilon = kDefaultEpsilon,
                                      std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Recombination PSNR.

enum class Recombination : int {
  self_self = 0,
  matching_self,
  self_matching,
  matching_matching,
  wrong_cam_self,
  self_wrong_dyn,
};
inline constexpr int kRecombinationCount = 6;
std::string to_string(Recombination r);

struct RecombinationTable {
  std::array<double, kRecombinationCount> psnr{};
  int targets = 0;
  [[nodiscard]] double operator[](Recombination r) const { return psnr[static_cast<std::size_t>(r)]; }
};

/// Camera and dynamics source cells for a target (c, d) with the other
/// block indices c2, d2.
std::pair<scene::ViewLabel, scene::ViewLabel> recombination_sources(Recombination r, scene::ViewLabel target,
                                                                     scene::ViewLabel other);

/// Mean PSNR per pattern over the four targets of each scene's evaluation
/// block. Scenes are the first n_scenes grids (all when n_scenes <= 0).
template <typename Scalar>
RecombinationTable recombination_table(const DySTModel<Scalar>& model, std::span<const scene::ViewGrid> grids,
                                       int n_scenes, std::uint64_t seed = 0, int workers = 1);

// ---------------------------------------------------------------------------
// Distance matrices.

/// Pairwise L2 distances between the rows of `latents`.
Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& latents);

/// Distances between the latents of `views`, all estimated against
/// `z_prime`. Requires at least two views.
template <typename Scalar>
Eigen::MatrixXd latent_distance_matrix(const DySTModel<Scalar>& model, std::span<const Image> views,
                                       const Matrix<Scalar>& z_prime, LatentSpace space);

/// Mean of the off-diagonal entries.
double mean_off_diagonal(const Eigen::MatrixXd& m);

// ---------------------------------------------------------------------------
// PCA.

struct PCABasis {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;      // one unit vector per row, by decreasing variance
  Eigen::VectorXd variances;       // eigenvalue per kept component
  Eigen::VectorXd explained_share; // variance / total variance
  int dimension = 0;
  int rank = 0;                    // kept components
  [[nodiscard]] bool truncated() const { return rank < dimension; }
};

/// Eigendecomposition of the sample covariance of the rows of `samples`.
/// Requires at least dim + 1 rows. Directions with variance below a
/// relative tolerance are dropped and reported through `rank`.
PCABasis fit_pca(const Eigen::MatrixXd& samples);

/// base + offset * sigma_k * u_k for every offset.
std::vector<Eigen::VectorXd> pca_traversal(const PCABasis& basis, const Eigen::VectorXd& base, int component,
                                           std::span<const double> offsets);

}  // namespace dyst::eval
