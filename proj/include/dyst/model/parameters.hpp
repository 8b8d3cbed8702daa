#pragma once

#include <cmath>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "dyst/autodiff/tape.hpp"
#include "dyst/core/types.hpp"

namespace dyst {

template <typename Scalar>
struct Parameter {
  std::string name;
  Matrix<Scalar> value;
  Matrix<Scalar> grad;
};

/// Ordered, named collection of learnable arrays.
template <typename Scalar>
class ParameterSet {
 public:
  int add(std::string name, Matrix<Scalar> init) {
    if (index_.contains(name)) throw InvalidInput("duplicate parameter name: " + name);
    const int idx = static_cast<int>(params_.size());
    index_.emplace(name, idx);
    Matrix<Scalar> grad = Matrix<Scalar>::Zero(init.rows(), init.cols());
    params_.push_back({std::move(name), std::move(init), std::move(grad)});
    return idx;
  }

  [[nodiscard]] int size() const { return static_cast<int>(params_.size()); }
  Parameter<Scalar>& operator[](int i) { return params_[static_cast<std::size_t>(i)]; }
  const Parameter<Scalar>& operator[](int i) const { return params_[static_cast<std::size_t>(i)]; }

  [[nodiscard]] int find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
  }

  [[nodiscard]] Eigen::Index scalar_count() const {
    Eigen::Index n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p.grad.setZero();
  }

  [[nodiscard]] double grad_norm() const {
    double s = 0.0;
    for (const auto& p : params_) s += static_cast<double>(p.grad.squaredNorm());
    return std::sqrt(s);
  }

  [[nodiscard]] bool all_finite() const {
    for (const auto& p : params_) {
      if (!p.value.allFinite()) return false;
    }
    return true;
  }

  template <typename Other>
  [[nodiscard]] ParameterSet<Other> cast() const {
    ParameterSet<Other> out;
    for (const auto& p : params_) out.add(p.name, p.value.template cast<Other>());
    return out;
  }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::vector<Parameter<Scalar>> params_;
  std::unordered_map<std::string, int> index_;
};

/// Lazily registers parameters on a tape. With gradient tracking enabled,
/// backward() accumulates into Parameter::grad.
template <typename Scalar>
class Binding {
 public:
  Binding(ad::Tape<Scalar>& tape, const ParameterSet<Scalar>& params)
      : tape_(&tape), frozen_(&params), vars_(static_cast<std::size_t>(params.size())) {}

  Binding(ad::Tape<Scalar>& tape, ParameterSet<Scalar>& params, bool track_gradients)
      : tape_(&tape),
        frozen_(&params),
        mutable_(track_gradients ? &params : nullptr),
        vars_(static_cast<std::size_t>(params.size())) {}

  ad::Var<Scalar> operator()(int index) {
    auto& v = vars_.at(static_cast<std::size_t>(index));
    if (!v.valid()) {
      Matrix<Scalar>* sink = mutable_ ? &(*mutable_)[index].grad : nullptr;
      v = tape_->parameter((*frozen_)[index].value, sink);
    }
    return v;
  }

  ad::Tape<Scalar>& tape() { return *tape_; }
  ad::Var<Scalar> constant(Matrix<Scalar> m) { return tape_->constant(std::move(m)); }

 private:
  ad::Tape<Scalar>* tape_;
  const ParameterSet<Scalar>* frozen_;
  ParameterSet<Scalar>* mutable_ = nullptr;
  std::vector<ad::Var<Scalar>> vars_;
};

}  // namespace dyst
