#include <gtest/gtest.h>

#include <numbers>

#include "dyst/model/dyst_model.hpp"
#include "dyst/model/positional_encoding.hpp"
#include "dyst/training/loss.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"

using namespace dyst;
using dyst::testkit::micro_example;
using dyst::testkit::micro_grid;
using dyst::testkit::small_config;

TEST(ModelConfig, PresetsValidate) {
  EXPECT_NO_THROW(ModelConfig{}.validate());
  EXPECT_NO_THROW(ModelConfig::full().validate());
  EXPECT_NO_THROW(ModelConfig::micro().validate());
  EXPECT_NO_THROW(small_config().validate());
}

TEST(ModelConfig, FullPresetMatchesReferenceArchitecture) {
  const auto p = ModelConfig::full();
  EXPECT_EQ(p.image_height, 128);
  EXPECT_EQ(p.image_width, 128);
  EXPECT_EQ(p.token_dim, 768);
  EXPECT_EQ(p.tokens_per_view(), 16 * 16);
}

TEST(ModelConfig, RejectsInconsistentSettings) {
  auto bad = ModelConfig::micro();
  bad.heads = 3;
  EXPECT_THROW(bad.validate(), InvalidInput);
  bad = ModelConfig::micro();
  bad.enc_patch = 3;
  EXPECT_THROW(bad.validate(), InvalidInput);
  bad = ModelConfig::micro();
  bad.enc_cnn_layers = 1;  // patch 4 needs two stride-2 layers
  EXPECT_THROW(bad.validate(), InvalidInput);
  bad = ModelConfig::micro();
  bad.image_width = 12;  // not divisible by the estimator patch
  EXPECT_THROW(bad.validate(), InvalidInput);
}

TEST(PositionalEncoding, PixelEncodingClosedForm) {
  Matrix<double> coords(2, 2);
  coords << 0.25, 0.75, 0.1, 0.9;
  const auto pe = pixel_encoding<double>(coords, 3);
  ASSERT_EQ(pe.cols(), 12);
  for (int r = 0; r < 2; ++r) {
    for (int k = 0; k < 3; ++k) {
      const double f = std::numbers::pi * (1 << k);
      EXPECT_NEAR(pe(r, 4 * k + 0), std::sin(f * coords(r, 0)), 1e-15);
      EXPECT_NEAR(pe(r, 4 * k + 1), std::cos(f * coords(r, 0)), 1e-15);
      EXPECT_NEAR(pe(r, 4 * k + 2), std::sin(f * coords(r, 1)), 1e-15);
      EXPECT_NEAR(pe(r, 4 * k + 3), std::cos(f * coords(r, 1)), 1e-15);
    }
  }
}

TEST(PositionalEncoding, PixelCentersAreRowMajorAndInside) {
  const auto c = pixel_centers<double>(2, 4);
  ASSERT_EQ(c.rows(), 8);
  EXPECT_DOUBLE_EQ(c(0, 0), 0.125);
  EXPECT_DOUBLE_EQ(c(0, 1), 0.25);
  EXPECT_DOUBLE_EQ(c(5, 0), 0.375);
  EXPECT_DOUBLE_EQ(c(5, 1), 0.75);
  EXPECT_TRUE((c.array() > 0).all() && (c.array() < 1).all());
}

TEST(PositionalEncoding, GridEncodingRowsAreDistinct) {
  const auto g = grid_encoding<double>(3, 3, 8);
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < g.rows(); ++j) EXPECT_GT((g.row(i) - g.row(j)).norm(), 1e-3);
  }
}

TEST(DySTModel, SameSeedSameParameters) {
  const DySTModel<float> a(ModelConfig::micro(), 5);
  const DySTModel<float> b(ModelConfig::micro(), 5);
  const DySTModel<float> c(ModelConfig::micro(), 6);
  ASSERT_EQ(a.parameters().size(), b.parameters().size());
  bool differs = false;
  for (int i = 0; i < a.parameters().size(); ++i) {
    EXPECT_EQ(a.parameters()[i].name, b.parameters()[i].name);
    EXPECT_EQ(a.parameters()[i].value, b.parameters()[i].value);
    differs |= a.parameters()[i].value != c.parameters()[i].value;
  }
  EXPECT_TRUE(differs);
}

TEST(DySTModel, AdoptingParametersChecksLayout) {
  const DySTModel<double> a(ModelConfig::micro(), 1);
  EXPECT_NO_THROW(DySTModel<double>(ModelConfig::micro(), a.parameters()));
  auto other = ModelConfig::micro();
  other.token_dim = 32;
  EXPECT_THROW(DySTModel<double>(other, a.parameters()), InvalidInput);
  ParameterSet<double> extra = a.parameters();
  extra.add("stray", Matrix<double>::Zero(1, 1));
  EXPECT_THROW(DySTModel<double>(ModelConfig::micro(), extra), InvalidInput);
}

TEST(DySTModel, ShapesThroughThePipeline) {
  const auto cfg = small_config();
  const DySTModel<double> model(cfg, 3);
  const auto grid = micro_grid(2, cfg.image_height, cfg.image_width);
  const std::vector<Image> inputs{grid.at(0, 0), grid.at(1, 2), grid.at(3, 4)};
  const auto rep = encode(model, inputs);
  EXPECT_EQ(rep.tokens.rows(), 3 * cfg.tokens_per_view());
  EXPECT_EQ(rep.tokens.cols(), cfg.token_dim);
  EXPECT_EQ(rep.first_view_tokens().rows(), cfg.tokens_per_view());
  EXPECT_EQ(rep.first_view_tokens(), rep.tokens.topRows(cfg.tokens_per_view()));
  const auto lat = estimate_controls(model, grid.at(2, 2), rep.first_view_tokens());
  EXPECT_EQ(lat.camera.size(), cfg.camera_dim);
  EXPECT_EQ(lat.dynamics.size(), cfg.dynamics_dim);
  const Image out = render_full(model, lat, rep.tokens, cfg.image_height, cfg.image_width);
  EXPECT_EQ(out.height, cfg.image_height);
  EXPECT_TRUE((out.rgb.array() > 0).all() && (out.rgb.array() < 1).all());
}

TEST(DySTModel, RejectsBadInputs) {
  const auto cfg = ModelConfig::micro();
  const DySTModel<double> model(cfg, 3);
  EXPECT_THROW(encode(model, std::span<const Image>{}), InvalidInput);
  const Image wrong(16, 16);
  const std::vector<Image> inputs{wrong};
  EXPECT_THROW(encode(model, inputs), InvalidInput);
  const Image ok(8, 8);
  EXPECT_THROW(estimate_controls(model, ok, Matrix<double>(0, cfg.token_dim)), InvalidInput);
  const ControlLatents<double> lat{RowVector<double>::Zero(cfg.camera_dim), RowVector<double>::Zero(cfg.dynamics_dim)};
  Matrix<double> coords(1, 2);
  coords << 1.5, 0.5;
  EXPECT_THROW(decode(model, lat, Matrix<double>(Matrix<double>::Zero(4, cfg.token_dim)), coords), InvalidInput);
}

TEST(DySTModel, FirstViewEmbeddingMarksViewZero) {
  // Swapping the first view changes the tokens of the remaining views only
  // through attention; the embedding alone makes view order observable.
  const auto cfg = ModelConfig::micro();
  const DySTModel<double> model(cfg, 4);
  const auto grid = micro_grid(3);
  const std::vector<Image> ab{grid.at(0, 0), grid.at(1, 1)};
  const std::vector<Image> ba{grid.at(1, 1), grid.at(0, 0)};
  const auto r1 = encode(model, ab).tokens;
  const auto r2 = encode(model, ba).tokens;
  const int n = cfg.tokens_per_view();
  EXPECT_GT((r1.topRows(n) - r2.bottomRows(n)).norm(), 1e-6);
}

TEST(DySTModel, DecoderIsInvariantToSceneTokenPermutation) {
  const auto cfg = small_config();
  const DySTModel<double> model(cfg, 7);
  std::mt19937_64 rng(8);
  const Matrix<double> z = testkit::random_matrix(rng, 3 * cfg.tokens_per_view(), cfg.token_dim);
  std::vector<int> perm(static_cast<std::size_t>(z.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix<double> zp(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r) zp.row(r) = z.row(perm[static_cast<std::size_t>(r)]);
  const ControlLatents<double> lat{testkit::random_matrix(rng, 1, cfg.camera_dim),
                                   testkit::random_matrix(rng, 1, cfg.dynamics_dim)};
  const auto coords = pixel_centers<double>(cfg.image_height, cfg.image_width);
  const auto a = decode(model, lat, z, coords);
  const auto b = decode(model, lat, zp, coords);
  EXPECT_LE((a - b).norm() / a.norm(), 1e-5);
}

TEST(DySTModel, DecoderPixelsAreIndependent) {
  const auto cfg = small_config();
  const DySTModel<double> model(cfg, 9);
  std::mt19937_64 rng(10);
  const Matrix<double> z = testkit::random_matrix(rng, 2 * cfg.tokens_per_view(), cfg.token_dim);
  const ControlLatents<double> lat{testkit::random_matrix(rng, 1, cfg.camera_dim),
                                   testkit::random_matrix(rng, 1, cfg.dynamics_dim)};
  const auto coords = pixel_centers<double>(cfg.image_height, cfg.image_width);
  const auto full = decode(model, lat, z, coords);
  for (int r : {0, 17, 100, 255}) {
    const Matrix<double> one = coords.row(r);
    const auto single = decode(model, lat, z, one);
    EXPECT_LE((single.row(0) - full.row(r)).norm(), 1e-12);
  }
}

TEST(DySTModel, FloatAndDoubleAgree) {
  const auto cfg = small_config();
  const DySTModel<double> md(cfg, 11);
  const DySTModel<float> mf = md.cast<float>();
  const auto grid = micro_grid(4, cfg.image_height, cfg.image_width);
  const std::vector<Image> inputs{grid.at(0, 0), grid.at(2, 3)};
  const auto zd = encode(md, inputs);
  const auto zf = encode(mf, inputs);
  EXPECT_LE((zd.tokens.cast<float>() - zf.tokens).cwiseAbs().maxCoeff(), 1e-3);
}

// Full loss on the micro configuration, every parameter tensor, sampled
// entries, 64-bit, estimator gradient factor 1.
TEST(DySTModel, FullModelGradientMatchesFiniteDifferences) {
  DySTModel<double> model(ModelConfig::micro(), 12);
  const auto ex = micro_example(13);
  scene::Rng rng(14);
  const auto assignment = training::build_swap_assignment(ex.target_labels, training::SwapMode::swap, rng);
  const auto pixels = training::sample_pixels(rng, 8, 8, 64);
  training::LossOptions opts;
  model.parameters().zero_grad();
  training::nvs_loss(model, ex, assignment, pixels, opts);
  training::LossOptions eval = opts;
  eval.backward = false;
  std::mt19937_64 pick(15);
  double worst = 0.0;
  std::string where;
  for (auto& p : model.parameters()) {
    for (Eigen::Index k : testkit::sample_indices(pick, p.value.size(), 6)) {
      auto f = [&] { return training::nvs_loss(model, ex, assignment, pixels, eval); };
      const double numeric = testkit::five_point(f, p.value.data()[k], 1e-3);
      const double err = testkit::relative_error(p.grad.data()[k], numeric);
      if (err > worst) {
        worst = err;
        where = p.name;
      }
    }
  }
  EXPECT_LT(worst, 1e-4) << "worst tensor " << where;
}
