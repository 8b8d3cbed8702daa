#include "dyst/model/config.hpp"

#include <bit>

#include "dyst/core/types.hpp"

namespace dyst {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidInput("ModelConfig: " + what);
}

int log2_exact(int v) { return std::countr_zero(static_cast<unsigned>(v)); }

}  // namespace

void ModelConfig::validate() const {
  require(image_height > 0 && image_width > 0, "image size must be positive");
  require(enc_patch > 0 && std::has_single_bit(static_cast<unsigned>(enc_patch)), "enc_patch must be a power of two");
  require(est_patch > 0 && std::has_single_bit(static_cast<unsigned>(est_patch)), "est_patch must be a power of two");
  require(image_height % enc_patch == 0 && image_width % enc_patch == 0, "image size not divisible by enc_patch");
  require(image_height % est_patch == 0 && image_width % est_patch == 0, "image size not divisible by est_patch");
  require(enc_cnn_layers >= log2_exact(enc_patch) && enc_cnn_layers >= 1, "enc_cnn_layers too small for enc_patch");
  require(est_cnn_layers >= log2_exact(est_patch) && est_cnn_layers >= 1, "est_cnn_layers too small for est_patch");
  require(enc_cnn_channels > 0 && enc_cnn_channels % 4 == 0, "enc_cnn_channels must be a positive multiple of 4");
  require(est_cnn_channels > 0 && est_cnn_channels % 4 == 0, "est_cnn_channels must be a positive multiple of 4");
  require(token_dim > 0 && heads > 0 && token_dim % heads == 0, "token_dim must be divisible by heads");
  require(enc_layers >= 1 && est_layers >= 1 && dec_layers >= 1, "layer counts must be positive");
  require(mlp_hidden > 0 && dec_mlp_hidden > 0, "hidden sizes must be positive");
  require(pixel_pe_freqs >= 1, "pixel_pe_freqs must be positive");
  require(camera_dim >= 1 && dynamics_dim >= 1, "latent dims must be >= 1");
}

ModelConfig ModelConfig::full() {
  ModelConfig c;
  c.image_height = c.image_width = 128;
  c.enc_cnn_layers = 6;
  c.enc_cnn_channels = 128;
  c.enc_patch = 8;
  c.token_dim = 768;
  c.enc_layers = 5;
  c.heads = 12;
  c.mlp_hidden = 1536;
  c.est_cnn_layers = 8;
  c.est_cnn_channels = 128;
  c.est_patch = 16;
  c.est_layers = 3;
  c.dec_layers = 2;
  c.dec_mlp_hidden = 768;
  c.camera_dim = c.dynamics_dim = 8;
  return c;
}

ModelConfig ModelConfig::micro() {
  ModelConfig c;
  c.image_height = c.image_width = 8;
  c.enc_cnn_layers = 2;
  c.enc_cnn_channels = 4;
  c.enc_patch = 4;
  c.token_dim = 16;
  c.enc_layers = 1;
  c.heads = 1;
  c.mlp_hidden = 16;
  c.est_cnn_layers = 3;
  c.est_cnn_channels = 4;
  c.est_patch = 8;
  c.est_layers = 1;
  c.dec_layers = 1;
  c.dec_mlp_hidden = 8;
  c.pixel_pe_freqs = 2;
  c.camera_dim = 2;
  c.dynamics_dim = 2;
  return c;
}

}  // namespace dyst
