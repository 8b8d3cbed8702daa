#pragma once

#include <vector>

#include "dyst/model/parameters.hpp"

namespace dyst::training {

/// Scales all gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
template <typename Scalar>
double clip_gradients(ParameterSet<Scalar>& params, double max_norm) {
  const double norm = params.grad_norm();
  if (norm > max_norm && norm > 0.0) {
    const auto s = static_cast<Scalar>(max_norm / norm);
    for (auto& p : params) p.grad *= s;
  }
  return norm;
}

template <typename Scalar>
class Adam {
 public:
  Adam(double beta1, double beta2, double eps) : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParameterSet<Scalar>& params, double lr) {
    if (first_.empty()) {
      for (const auto& p : params) {
        first_.push_back(Matrix<Scalar>::Zero(p.value.rows(), p.value.cols()));
        second_.push_back(Matrix<Scalar>::Zero(p.value.rows(), p.value.cols()));
      }
    }
    ++updates_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(updates_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(updates_));
    const auto b1 = static_cast<Scalar>(beta1_);
    const auto b2 = static_cast<Scalar>(beta2_);
    const auto step_size = static_cast<Scalar>(lr / bc1);
    const auto inv_bc2 = static_cast<Scalar>(1.0 / bc2);
    const auto eps = static_cast<Scalar>(eps_);
    for (int i = 0; i < params.size(); ++i) {
      auto& p = params[i];
      auto& m = first_[static_cast<std::size_t>(i)];
      auto& v = second_[static_cast<std::size_t>(i)];
      m = b1 * m + (Scalar(1) - b1) * p.grad;
      v = b2 * v + (Scalar(1) - b2) * p.grad.cwiseAbs2();
      p.value.array() -= step_size * m.array() / ((v.array() * inv_bc2).sqrt() + eps);
    }
  }

  [[nodiscard]] long updates() const { return updates_; }
  std::vector<Matrix<Scalar>>& first_moments() { return first_; }
  std::vector<Matrix<Scalar>>& second_moments() { return second_; }
  [[nodiscard]] const std::vector<Matrix<Scalar>>& first_moments() const { return first_; }
  [[nodiscard]] const std::vector<Matrix<Scalar>>& second_moments() const { return second_; }
  void set_updates(long n) { updates_ = n; }

 private:
  double beta1_, beta2_, eps_;
  long updates_ = 0;
  std::vector<Matrix<Scalar>> first_;
  std::vector<Matrix<Scalar>> second_;
};

}  // namespace dyst::training
