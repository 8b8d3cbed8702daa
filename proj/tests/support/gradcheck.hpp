#pragma once

// Central finite-difference checks against the tape's reverse sweep.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "dyst/autodiff/tape.hpp"

namespace dyst::testkit {

using MatD = Matrix<double>;

/// |a - n| / max(|a|, |n|, floor): relative error that degrades to an
/// absolute error scaled by 1/floor for gradients near zero.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// `build` records a scalar loss on the tape from the given input vars.
using LossBuilder = std::function<ad::Var<double>(ad::Tape<double>&, const std::vector<ad::Var<double>>&)>;

inline double evaluate(const LossBuilder& build, const std::vector<MatD>& inputs) {
  ad::Tape<double> tape;
  std::vector<ad::Var<double>> vars;
  for (const auto& m : inputs) vars.push_back(tape.constant(m));
  return build(tape, vars).value()(0, 0);
}

inline std::vector<MatD> analytic_gradients(const LossBuilder& build, const std::vector<MatD>& inputs) {
  ad::Tape<double> tape;
  std::vector<MatD> grads;
  for (const auto& m : inputs) grads.push_back(MatD::Zero(m.rows(), m.cols()));
  std::vector<ad::Var<double>> vars;
  for (std::size_t i = 0; i < inputs.size(); ++i) vars.push_back(tape.parameter(inputs[i], &grads[i]));
  tape.backward(build(tape, vars));
  return grads;
}

/// Fourth-order central difference of `f` along one coordinate.
template <typename F>
double five_point(F&& f, double& x, double h) {
  const double saved = x;
  auto at = [&](double o) {
    x = saved + o;
    return f();
  };
  const double d = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
  x = saved;
  return d;
}

/// Largest relative error over every input entry.
inline double max_gradient_error(const LossBuilder& build, std::vector<MatD> inputs, double h = 1e-3) {
  const auto grads = analytic_gradients(build, inputs);
  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (Eigen::Index k = 0; k < inputs[i].size(); ++k) {
      const double numeric = five_point([&] { return evaluate(build, inputs); }, inputs[i].data()[k], h);
      worst = std::max(worst, relative_error(grads[i].data()[k], numeric));
    }
  }
  return worst;
}

inline MatD random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  MatD m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

}  // namespace dyst::testkit
