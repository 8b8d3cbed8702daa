#pragma once

#include <string>

namespace dyst {

/// Architecture hyper-parameters. Defaults are the desk-scale profile;
/// full() returns the full-size recipe.
struct ModelConfig {
  int image_height = 48;
  int image_width = 48;

  // Encoder.
  int enc_cnn_layers = 4;
  int enc_cnn_channels = 64;
  int enc_patch = 8;
  int token_dim = 128;
  int enc_layers = 5;
  int heads = 4;
  int mlp_hidden = 256;

  // Joint camera / dynamics estimator.
  int est_cnn_layers = 5;
  int est_cnn_channels = 64;
  int est_patch = 16;
  int est_layers = 3;

  // Decoder.
  int dec_layers = 2;
  int dec_mlp_hidden = 256;
  int pixel_pe_freqs = 6;

  int camera_dim = 8;
  int dynamics_dim = 8;

  /// Throws InvalidInput describing the first violated constraint.
  void validate() const;

  [[nodiscard]] int enc_grid_h() const { return image_height / enc_patch; }
  [[nodiscard]] int enc_grid_w() const { return image_width / enc_patch; }
  [[nodiscard]] int tokens_per_view() const { return enc_grid_h() * enc_grid_w(); }
  [[nodiscard]] int est_tokens() const { return (image_height / est_patch) * (image_width / est_patch); }
  [[nodiscard]] int latent_dim() const { return camera_dim + dynamics_dim; }
  [[nodiscard]] int pixel_pe_dim() const { return 4 * pixel_pe_freqs; }

  static ModelConfig full();
  /// Tiny configuration for finite-difference checks: 8x8 images, one head.
  static ModelConfig micro();

  bool operator==(const ModelConfig&) const = default;
};

}  // namespace dyst
