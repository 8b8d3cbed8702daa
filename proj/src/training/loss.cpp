#include "dyst/training/loss.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>

namespace dyst::training {

std::vector<PixelSample> sample_pixels(scene::Rng& rng, int height, int width, int count) {
  const int per_target = height * width;
  const int total = 4 * per_target;
  if (count < 1 || count > total) throw InvalidInput("sample_pixels: count must lie in [1, 4*H*W]");
  std::vector<int> population(static_cast<std::size_t>(total));
  std::iota(population.begin(), population.end(), 0);
  std::vector<int> flat;
  flat.reserve(static_cast<std::size_t>(count));
  std::sample(population.begin(), population.end(), std::back_inserter(flat), count, rng);
  std::vector<PixelSample> out;
  out.reserve(flat.size());
  for (int f : flat) out.push_back({f / per_target, f % per_target});
  return out;
}

template <typename Scalar>
Scalar nvs_loss(DySTModel<Scalar>& model, const scene::TrainingExample& example, const SwapAssignment& assignment,
                std::span<const PixelSample> pixels, const LossOptions& options) {
  if (example.targets.size() != 4) throw InvalidInput("nvs_loss: expected 4 targets");
  if (pixels.empty()) throw InvalidInput("nvs_loss: no pixels sampled");
  const int h = model.config().image_height;
  const int w = model.config().image_width;

  ad::Tape<Scalar> tape;
  Binding<Scalar> bind(tape, model.parameters(), options.backward);
  const auto z = model.encode(bind, example.inputs);
  const auto z_prime = model.first_view(z);

  const auto grad_scale = static_cast<Scalar>(options.estimator_grad_scale);
  std::vector<ControlVars<Scalar>> est;
  est.reserve(4);
  for (const auto& target : example.targets) {
    auto cv = model.estimate(bind, target, z_prime);
    if (options.estimator_grad_scale != 1.0) {
      cv.camera = ad::scale_grad(cv.camera, grad_scale);
      cv.dynamics = ad::scale_grad(cv.dynamics, grad_scale);
    }
    est.push_back(cv);
  }

  std::vector<ad::Var<Scalar>> rows;
  rows.reserve(4);
  for (std::size_t t = 0; t < 4; ++t) {
    const LatentSource& src = assignment.sources[t];
    auto cam = est.at(static_cast<std::size_t>(src.camera_view)).camera;
    auto dyn = est.at(static_cast<std::size_t>(src.dynamics_view)).dynamics;
    if (src.average_with_target) {
      cam = ad::scale(ad::add(est[t].camera, cam), Scalar(0.5));
      dyn = ad::scale(ad::add(est[t].dynamics, dyn), Scalar(0.5));
    }
    rows.push_back(ad::concat_cols(cam, dyn));
  }
  const auto table = ad::concat_rows<Scalar>(rows);

  std::vector<int> which;
  which.reserve(pixels.size());
  Matrix<Scalar> coords(static_cast<Eigen::Index>(pixels.size()), 2);
  Matrix<Scalar> truth(static_cast<Eigen::Index>(pixels.size()), 3);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const auto& p = pixels[i];
    if (p.target < 0 || p.target >= 4 || p.pixel < 0 || p.pixel >= h * w) {
      throw InvalidInput("nvs_loss: pixel sample out of range");
    }
    const auto r = static_cast<Eigen::Index>(i);
    which.push_back(p.target);
    coords(r, 0) = static_cast<Scalar>((p.pixel % w + 0.5) / w);
    coords(r, 1) = static_cast<Scalar>((p.pixel / w + 0.5) / h);
    truth.row(r) = example.targets[static_cast<std::size_t>(p.target)].rgb.row(p.pixel).template cast<Scalar>();
  }

  const auto pred = model.decode(bind, ad::gather_rows(table, std::move(which)), coords, z);
  const auto loss = ad::mse(pred, truth);
  const Scalar value = loss.value()(0, 0);
  if (!std::isfinite(static_cast<double>(value))) {
    throw NumericalError("nvs_loss: non-finite loss (" + std::to_string(static_cast<double>(value)) + ")");
  }
  if (options.backward) tape.backward(ad::scale(loss, static_cast<Scalar>(options.weight)));
  return value;
}

template float nvs_loss<float>(DySTModel<float>&, const scene::TrainingExample&, const SwapAssignment&,
                               std::span<const PixelSample>, const LossOptions&);
template double nvs_loss<double>(DySTModel<double>&, const scene::TrainingExample&, const SwapAssignment&,
                                 std::span<const PixelSample>, const LossOptions&);

}  // namespace dyst::training
