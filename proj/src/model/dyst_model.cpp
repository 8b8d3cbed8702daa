#include "dyst/model/dyst_model.hpp"

#include <array>
#include <bit>
#include <cmath>

#include "dyst/model/positional_encoding.hpp"

namespace dyst {

template <typename Scalar>
DySTModel<Scalar>::DySTModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  std::mt19937_64 rng(seed);
  build_layout(&rng);
}

template <typename Scalar>
DySTModel<Scalar>::DySTModel(const ModelConfig& config, ParameterSet<Scalar> params)
    : config_(config), params_(std::move(params)), adopting_(true) {
  config_.validate();
  build_layout(nullptr);
  adopting_ = false;
}

template <typename Scalar>
int DySTModel<Scalar>::make(const std::string& name, int rows, int cols, std::mt19937_64* rng, double stddev) {
  ++made_;
  if (adopting_) {
    const int idx = params_.find(name);
    if (idx < 0) throw InvalidInput("parameter set lacks '" + name + "'");
    const auto& v = params_[idx].value;
    if (v.rows() != rows || v.cols() != cols) {
      throw InvalidInput("parameter '" + name + "' has shape " + std::to_string(v.rows()) + "x" +
                         std::to_string(v.cols()) + ", config expects " + std::to_string(rows) + "x" +
                         std::to_string(cols));
    }
    return idx;
  }
  Mat init = Mat::Zero(rows, cols);
  if (stddev > 0.0) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (Eigen::Index i = 0; i < init.size(); ++i) init.data()[i] = static_cast<Scalar>(dist(*rng));
  }
  return params_.add(name, std::move(init));
}

template <typename Scalar>
layers::Linear DySTModel<Scalar>::make_linear(const std::string& name, int in, int out, std::mt19937_64* rng) {
  layers::Linear l;
  l.w = make(name + ".w", in, out, rng, 1.0 / std::sqrt(static_cast<double>(in)));
  l.b = make(name + ".b", 1, out, rng, 0.0);
  return l;
}

template <typename Scalar>
layers::Norm DySTModel<Scalar>::make_norm(const std::string& name, int dim) {
  layers::Norm n;
  n.gain = make(name + ".gain", 1, dim, nullptr, 0.0);
  if (!adopting_) params_[n.gain].value.setOnes();
  n.bias = make(name + ".bias", 1, dim, nullptr, 0.0);
  return n;
}

template <typename Scalar>
layers::Attention DySTModel<Scalar>::make_attention(const std::string& name, std::mt19937_64* rng) {
  const int d = config_.token_dim;
  return {make_linear(name + ".q", d, d, rng), make_linear(name + ".k", d, d, rng),
          make_linear(name + ".v", d, d, rng), make_linear(name + ".out", d, d, rng)};
}

template <typename Scalar>
layers::Mlp DySTModel<Scalar>::make_mlp(const std::string& name, int hidden, std::mt19937_64* rng) {
  const int d = config_.token_dim;
  return {make_linear(name + ".fc1", d, hidden, rng), make_linear(name + ".fc2", hidden, d, rng)};
}

template <typename Scalar>
std::vector<layers::Conv> DySTModel<Scalar>::make_cnn(const std::string& name, int count, int channels, int patch,
                                                      std::mt19937_64* rng) {
  // Stride-2 layers first so the remaining stride-1 layers run on the
  // reduced lattice; total downsampling equals the patch size.
  const int downsamples = std::countr_zero(static_cast<unsigned>(patch));
  std::vector<layers::Conv> cnn;
  int c_in = 3;
  for (int i = 0; i < count; ++i) {
    layers::Conv conv;
    conv.proj = make_linear(name + std::to_string(i), 9 * c_in, channels, rng);
    conv.stride = i < downsamples ? 2 : 1;
    cnn.push_back(conv);
    c_in = channels;
  }
  return cnn;
}

template <typename Scalar>
void DySTModel<Scalar>::build_layout(std::mt19937_64* rng) {
  const ModelConfig& c = config_;
  const int d = c.token_dim;

  enc_cnn_ = make_cnn("enc.cnn", c.enc_cnn_layers, c.enc_cnn_channels, c.enc_patch, rng);
  enc_lift_ = make_linear("enc.lift", c.enc_cnn_channels, d, rng);
  first_view_embedding_ = make("enc.first_view", 1, d, rng, 0.02);
  for (int i = 0; i < c.enc_layers; ++i) {
    const std::string p = "enc.block" + std::to_string(i);
    enc_blocks_.push_back({make_norm(p + ".norm_attn", d), make_attention(p + ".attn", rng),
                           make_norm(p + ".norm_mlp", d), make_mlp(p + ".mlp", c.mlp_hidden, rng)});
  }
  enc_out_norm_ = make_norm("enc.out_norm", d);

  est_cnn_ = make_cnn("est.cnn", c.est_cnn_layers, c.est_cnn_channels, c.est_patch, rng);
  est_lift_ = make_linear("est.lift", c.est_cnn_channels, d, rng);
  dynamics_token_ = make("est.dynamics_token", 1, d, rng, 0.02);
  for (int i = 0; i < c.est_layers; ++i) {
    const std::string p = "est.block" + std::to_string(i);
    est_blocks_.push_back({make_norm(p + ".norm_cross", d), make_attention(p + ".cross", rng),
                           make_norm(p + ".norm_self", d), make_attention(p + ".self", rng),
                           make_norm(p + ".norm_mlp", d), make_mlp(p + ".mlp", c.mlp_hidden, rng)});
  }
  est_out_norm_ = make_norm("est.out_norm", d);
  cam_head_ = make_linear("est.camera_head", d, c.camera_dim, rng);
  dyn_head_ = make_linear("est.dynamics_head", d, c.dynamics_dim, rng);

  dec_lift_ = make_linear("dec.lift", c.latent_dim() + c.pixel_pe_dim(), d, rng);
  for (int i = 0; i < c.dec_layers; ++i) {
    const std::string p = "dec.block" + std::to_string(i);
    dec_blocks_.push_back({make_norm(p + ".norm_cross", d), make_attention(p + ".cross", rng),
                           make_norm(p + ".norm_mlp", d), make_mlp(p + ".mlp", c.mlp_hidden, rng)});
  }
  dec_out_norm_ = make_norm("dec.out_norm", d);
  dec_hidden_ = make_linear("dec.rgb_hidden", d, c.dec_mlp_hidden, rng);
  dec_rgb_ = make_linear("dec.rgb_out", c.dec_mlp_hidden, 3, rng);

  if (adopting_ && made_ != params_.size()) {
    throw InvalidInput("parameter set has " + std::to_string(params_.size()) + " arrays, config expects " +
                       std::to_string(made_));
  }
  enc_grid_pe_ = grid_encoding<Scalar>(c.enc_grid_h(), c.enc_grid_w(), c.enc_cnn_channels);
  est_grid_pe_ = grid_encoding<Scalar>(c.image_height / c.est_patch, c.image_width / c.est_patch, c.est_cnn_channels);
}

template <typename Scalar>
auto DySTModel<Scalar>::apply_linear(Binding<Scalar>& bind, Var x, const layers::Linear& l) const -> Var {
  return ad::linear(x, bind(l.w), bind(l.b));
}

template <typename Scalar>
auto DySTModel<Scalar>::apply_norm(Binding<Scalar>& bind, Var x, const layers::Norm& n) const -> Var {
  return ad::layer_norm(x, bind(n.gain), bind(n.bias));
}

template <typename Scalar>
auto DySTModel<Scalar>::apply_attention(Binding<Scalar>& bind, Var query, Var memory, const layers::Attention& a) const
    -> Var {
  Var q = apply_linear(bind, query, a.q);
  Var k = apply_linear(bind, memory, a.k);
  Var v = apply_linear(bind, memory, a.v);
  return apply_linear(bind, ad::attention(q, k, v, config_.heads), a.out);
}

template <typename Scalar>
auto DySTModel<Scalar>::apply_mlp(Binding<Scalar>& bind, Var x, const layers::Mlp& m) const -> Var {
  return apply_linear(bind, ad::gelu(apply_linear(bind, x, m.fc1)), m.fc2);
}

template <typename Scalar>
auto DySTModel<Scalar>::image_tokens(Binding<Scalar>& bind, const Image& image, const std::vector<layers::Conv>& cnn,
                                     const Mat& grid_pe, const layers::Linear& lift) const -> Var {
  if (image.height != config_.image_height || image.width != config_.image_width) {
    throw InvalidInput("image is " + std::to_string(image.height) + "x" + std::to_string(image.width) +
                       ", model expects " + std::to_string(config_.image_height) + "x" +
                       std::to_string(config_.image_width));
  }
  Var x = bind.constant(image_features<Scalar>(image));
  int h = image.height;
  int w = image.width;
  for (std::size_t i = 0; i < cnn.size(); ++i) {
    const auto& conv = cnn[i];
    Var cols = ad::im2col(x, h, w, 3, conv.stride, 1);
    h = (h + 2 - 3) / conv.stride + 1;
    w = (w + 2 - 3) / conv.stride + 1;
    x = apply_linear(bind, cols, conv.proj);
    if (i + 1 < cnn.size()) x = ad::gelu(x);
  }
  x = ad::add(x, bind.constant(grid_pe));
  return apply_linear(bind, x, lift);
}

template <typename Scalar>
auto DySTModel<Scalar>::encode(Binding<Scalar>& bind, std::span<const Image> inputs) const -> Var {
  if (inputs.empty()) throw InvalidInput("encode: at least one input view is required");
  std::vector<Var> views;
  views.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Var tokens = image_tokens(bind, inputs[i], enc_cnn_, enc_grid_pe_, enc_lift_);
    if (i == 0) tokens = ad::add_row(tokens, bind(first_view_embedding_));
    views.push_back(tokens);
  }
  Var x = ad::concat_rows<Scalar>(views);
  for (const auto& blk : enc_blocks_) {
    Var h = apply_norm(bind, x, blk.norm_attn);
    x = ad::add(x, apply_attention(bind, h, h, blk.self_attn));
    x = ad::add(x, apply_mlp(bind, apply_norm(bind, x, blk.norm_mlp), blk.mlp));
  }
  return apply_norm(bind, x, enc_out_norm_);
}

template <typename Scalar>
auto DySTModel<Scalar>::first_view(Var z) const -> Var {
  return ad::slice_rows(z, 0, config_.tokens_per_view());
}

template <typename Scalar>
ControlVars<Scalar> DySTModel<Scalar>::estimate(Binding<Scalar>& bind, const Image& target, Var z_prime) const {
  if (z_prime.rows() == 0) throw InvalidInput("estimate: empty conditioning token set");
  Var patches = image_tokens(bind, target, est_cnn_, est_grid_pe_, est_lift_);
  const Eigen::Index n = patches.rows();
  const std::array<Var, 2> parts{patches, bind(dynamics_token_)};
  Var x = ad::concat_rows<Scalar>(parts);
  for (const auto& blk : est_blocks_) {
    x = ad::add(x, apply_attention(bind, apply_norm(bind, x, blk.norm_cross), z_prime, blk.cross_attn));
    Var h = apply_norm(bind, x, blk.norm_self);
    x = ad::add(x, apply_attention(bind, h, h, blk.self_attn));
    x = ad::add(x, apply_mlp(bind, apply_norm(bind, x, blk.norm_mlp), blk.mlp));
  }
  x = apply_norm(bind, x, est_out_norm_);
  Var pooled = ad::mean_rows(ad::slice_rows(x, 0, n));
  Var dyn_out = ad::slice_rows(x, n, 1);
  return {apply_linear(bind, pooled, cam_head_), apply_linear(bind, dyn_out, dyn_head_)};
}

template <typename Scalar>
auto DySTModel<Scalar>::decode(Binding<Scalar>& bind, Var latents, const Mat& coords, Var z) const -> Var {
  if (latents.cols() != config_.latent_dim() || latents.rows() != coords.rows() || coords.cols() != 2) {
    throw InvalidInput("decode: latent / coordinate shape mismatch");
  }
  if ((coords.array() < Scalar(0)).any() || (coords.array() > Scalar(1)).any()) {
    throw InvalidInput("decode: pixel coordinates must lie in [0,1]^2");
  }
  Var pe = bind.constant(pixel_encoding<Scalar>(coords, config_.pixel_pe_freqs));
  Var x = apply_linear(bind, ad::concat_cols(latents, pe), dec_lift_);
  for (const auto& blk : dec_blocks_) {
    x = ad::add(x, apply_attention(bind, apply_norm(bind, x, blk.norm_cross), z, blk.cross_attn));
    x = ad::add(x, apply_mlp(bind, apply_norm(bind, x, blk.norm_mlp), blk.mlp));
  }
  x = apply_norm(bind, x, dec_out_norm_);
  x = ad::gelu(apply_linear(bind, x, dec_hidden_));
  return ad::sigmoid(apply_linear(bind, x, dec_rgb_));
}

// ---------------------------------------------------------------------------

template <typename Scalar>
Matrix<Scalar> SceneRepresentation<Scalar>::first_view_tokens() const {
  Eigen::Index count = 0;
  for (bool m : first_view_mask) count += m ? 1 : 0;
  Matrix<Scalar> out(count, tokens.cols());
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < first_view_mask.size(); ++i) {
    if (first_view_mask[i]) out.row(r++) = tokens.row(static_cast<Eigen::Index>(i));
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> image_features(const Image& image) {
  return (image.rgb.cast<Scalar>().array() * Scalar(2) - Scalar(1)).matrix();
}

template <typename Scalar>
SceneRepresentation<Scalar> encode(const DySTModel<Scalar>& model, std::span<const Image> inputs) {
  ad::Tape<Scalar> tape;
  Binding<Scalar> bind(tape, model.parameters());
  SceneRepresentation<Scalar> rep;
  rep.tokens = model.encode(bind, inputs).value();
  const auto per_view = static_cast<std::size_t>(model.config().tokens_per_view());
  rep.first_view_mask.assign(static_cast<std::size_t>(rep.tokens.rows()), false);
  for (std::size_t i = 0; i < per_view; ++i) rep.first_view_mask[i] = true;
  return rep;
}

template <typename Scalar>
ControlLatents<Scalar> estimate_controls(const DySTModel<Scalar>& model, const Image& target,
                                         const Matrix<Scalar>& z_prime) {
  if (z_prime.rows() == 0) throw InvalidInput("estimate_controls: empty conditioning token set");
  ad::Tape<Scalar> tape;
  Binding<Scalar> bind(tape, model.parameters());
  auto vars = model.estimate(bind, target, tape.constant(z_prime));
  return {vars.camera.value().row(0), vars.dynamics.value().row(0)};
}

template <typename Scalar>
Matrix<Scalar> decode(const DySTModel<Scalar>& model, const ControlLatents<Scalar>& controls,
                      const Matrix<Scalar>& scene_tokens, const Matrix<Scalar>& coords) {
  const auto& cfg = model.config();
  if (controls.camera.size() != cfg.camera_dim || controls.dynamics.size() != cfg.dynamics_dim) {
    throw InvalidInput("decode: control latent dimensions do not match the model");
  }
  ad::Tape<Scalar> tape;
  Binding<Scalar> bind(tape, model.parameters());
  Matrix<Scalar> latents(coords.rows(), cfg.latent_dim());
  for (Eigen::Index r = 0; r < coords.rows(); ++r) {
    latents.row(r) << controls.camera, controls.dynamics;
  }
  return model.decode(bind, tape.constant(std::move(latents)), coords, tape.constant(scene_tokens)).value();
}

template <typename Scalar>
Image render_full(const DySTModel<Scalar>& model, const ControlLatents<Scalar>& controls,
                  const Matrix<Scalar>& scene_tokens, int height, int width) {
  const Matrix<Scalar> rgb = decode(model, controls, scene_tokens, pixel_centers<Scalar>(height, width));
  Image img(height, width);
  img.rgb = rgb.template cast<float>();
  return img;
}

template class DySTModel<float>;
template class DySTModel<double>;

#define DYST_INSTANTIATE(S)                                                                                  \
  template struct SceneRepresentation<S>;                                                                    \
  template Matrix<S> image_features<S>(const Image&);                                                        \
  template SceneRepresentation<S> encode<S>(const DySTModel<S>&, std::span<const Image>);                    \
  template ControlLatents<S> estimate_controls<S>(const DySTModel<S>&, const Image&, const Matrix<S>&);      \
  template Matrix<S> decode<S>(const DySTModel<S>&, const ControlLatents<S>&, const Matrix<S>&,              \
                               const Matrix<S>&);                                                            \
  template Image render_full<S>(const DySTModel<S>&, const ControlLatents<S>&, const Matrix<S>&, int, int);

DYST_INSTANTIATE(float)
DYST_INSTANTIATE(double)

#undef DYST_INSTANTIATE

}  // namespace dyst
