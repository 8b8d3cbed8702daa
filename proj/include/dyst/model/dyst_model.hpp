#pragma once

// Set-latent scene model with a joint camera / dynamics estimator and a
// per-pixel cross-attention decoder.

#include <cstdint>
#include <span>
#include <vector>

#include "dyst/autodiff/ops.hpp"
#include "dyst/core/image.hpp"
#include "dyst/model/config.hpp"
#include "dyst/model/parameters.hpp"

namespace dyst {

namespace layers {

struct Linear {
  int w = -1;
  int b = -1;
};

struct Norm {
  int gain = -1;
  int bias = -1;
};

struct Attention {
  Linear q, k, v, out;
};

struct Mlp {
  Linear fc1, fc2;
};

struct Conv {
  Linear proj;  // (9 * c_in) x c_out
  int stride = 1;
};

struct EncoderBlock {
  Norm norm_attn;
  Attention self_attn;
  Norm norm_mlp;
  Mlp mlp;
};

struct EstimatorBlock {
  Norm norm_cross;
  Attention cross_attn;
  Norm norm_self;
  Attention self_attn;
  Norm norm_mlp;
  Mlp mlp;
};

struct DecoderBlock {
  Norm norm_cross;
  Attention cross_attn;
  Norm norm_mlp;
  Mlp mlp;
};

}  // namespace layers

/// Differentiable graph handles for the two control latents (1 x N each).
template <typename Scalar>
struct ControlVars {
  ad::Var<Scalar> camera;
  ad::Var<Scalar> dynamics;
};

template <typename Scalar>
class DySTModel {
 public:
  using Var = ad::Var<Scalar>;
  using Mat = Matrix<Scalar>;

  DySTModel(const ModelConfig& config, std::uint64_t seed);

  /// Rebuilds the layer layout for `config` and adopts `params`; throws
  /// InvalidInput unless names and shapes agree with the layout.
  DySTModel(const ModelConfig& config, ParameterSet<Scalar> params);

  [[nodiscard]] const ModelConfig& config() const { return config_; }
  ParameterSet<Scalar>& parameters() { return params_; }
  [[nodiscard]] const ParameterSet<Scalar>& parameters() const { return params_; }

  /// Scene tokens for the given views; rows [0, tokens_per_view) belong to
  /// view 0. Output is (views * tokens_per_view) x token_dim.
  Var encode(Binding<Scalar>& bind, std::span<const Image> inputs) const;

  /// Rows of `z` belonging to the first input view.
  Var first_view(Var z) const;

  ControlVars<Scalar> estimate(Binding<Scalar>& bind, const Image& target, Var z_prime) const;

  /// `latents` is P x (camera_dim + dynamics_dim), `coords` is P x 2 in
  /// [0,1]^2. Returns P x 3 RGB in (0,1).
  Var decode(Binding<Scalar>& bind, Var latents, const Mat& coords, Var z) const;

  template <typename Other>
  [[nodiscard]] DySTModel<Other> cast() const {
    return DySTModel<Other>(config_, params_.template cast<Other>());
  }

  /// Index of the dynamics output projection (weights, bias); exposed for
  /// structural tests on the latent routing.
  [[nodiscard]] layers::Linear dynamics_head() const { return dyn_head_; }
  [[nodiscard]] layers::Linear camera_head() const { return cam_head_; }

 private:
  void build_layout(std::mt19937_64* rng);
  Var image_tokens(Binding<Scalar>& bind, const Image& image, const std::vector<layers::Conv>& cnn,
                   const Mat& grid_pe, const layers::Linear& lift) const;
  Var apply_linear(Binding<Scalar>& bind, Var x, const layers::Linear& l) const;
  Var apply_norm(Binding<Scalar>& bind, Var x, const layers::Norm& n) const;
  Var apply_attention(Binding<Scalar>& bind, Var query, Var memory, const layers::Attention& a) const;
  Var apply_mlp(Binding<Scalar>& bind, Var x, const layers::Mlp& m) const;

  ModelConfig config_;
  ParameterSet<Scalar> params_;
  // When building from scratch new parameters are pushed; when adopting an
  // existing set they are looked up by name.
  bool adopting_ = false;
  int made_ = 0;

  std::vector<layers::Conv> enc_cnn_;
  layers::Linear enc_lift_;
  int first_view_embedding_ = -1;
  std::vector<layers::EncoderBlock> enc_blocks_;
  layers::Norm enc_out_norm_;

  std::vector<layers::Conv> est_cnn_;
  layers::Linear est_lift_;
  int dynamics_token_ = -1;
  std::vector<layers::EstimatorBlock> est_blocks_;
  layers::Norm est_out_norm_;
  layers::Linear cam_head_;
  layers::Linear dyn_head_;

  layers::Linear dec_lift_;
  std::vector<layers::DecoderBlock> dec_blocks_;
  layers::Norm dec_out_norm_;
  layers::Linear dec_hidden_;
  layers::Linear dec_rgb_;

  Mat enc_grid_pe_;
  Mat est_grid_pe_;

  int make(const std::string& name, int rows, int cols, std::mt19937_64* rng, double stddev);
  layers::Linear make_linear(const std::string& name, int in, int out, std::mt19937_64* rng);
  layers::Norm make_norm(const std::string& name, int dim);
  layers::Attention make_attention(const std::string& name, std::mt19937_64* rng);
  layers::Mlp make_mlp(const std::string& name, int hidden, std::mt19937_64* rng);
  std::vector<layers::Conv> make_cnn(const std::string& name, int layers, int channels, int patch,
                                     std::mt19937_64* rng);
};

// ---------------------------------------------------------------------------
// Inference surface. These run a fresh tape without gradient tracking.

template <typename Scalar>
struct SceneRepresentation {
  Matrix<Scalar> tokens;
  std::vector<bool> first_view_mask;

  [[nodiscard]] Matrix<Scalar> first_view_tokens() const;
};

template <typename Scalar>
struct ControlLatents {
  RowVector<Scalar> camera;
  RowVector<Scalar> dynamics;
};

template <typename Scalar>
SceneRepresentation<Scalar> encode(const DySTModel<Scalar>& model, std::span<const Image> inputs);

template <typename Scalar>
ControlLatents<Scalar> estimate_controls(const DySTModel<Scalar>& model, const Image& target,
                                         const Matrix<Scalar>& z_prime);

/// RGB per queried pixel, one row each.
template <typename Scalar>
Matrix<Scalar> decode(const DySTModel<Scalar>& model, const ControlLatents<Scalar>& controls,
                      const Matrix<Scalar>& scene_tokens, const Matrix<Scalar>& coords);

template <typename Scalar>
Image render_full(const DySTModel<Scalar>& model, const ControlLatents<Scalar>& controls,
                  const Matrix<Scalar>& scene_tokens, int height, int width);

/// Image as an (H*W) x 3 matrix mapped from [0,1] to [-1,1].
template <typename Scalar>
Matrix<Scalar> image_features(const Image& image);

extern template class DySTModel<float>;
extern template class DySTModel<double>;

}  // namespace dyst
