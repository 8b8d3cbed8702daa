#pragma once

// Reverse-mode differentiation over dense row-major matrices.
//
// A Tape records every operation applied to Var handles together with a
// closure that propagates the output gradient to its inputs. Nodes are
// stored in creation order, so a single reverse sweep is a valid
// topological traversal.

#include <cassert>
#include <functional>
#include <utility>
#include <vector>

#include "dyst/core/types.hpp"

namespace dyst::ad {

template <typename Scalar>
class Tape;

template <typename Scalar>
struct Var {
  Tape<Scalar>* tape = nullptr;
  int id = -1;

  [[nodiscard]] const Matrix<Scalar>& value() const { return tape->value(id); }
  [[nodiscard]] Eigen::Index rows() const { return value().rows(); }
  [[nodiscard]] Eigen::Index cols() const { return value().cols(); }
  [[nodiscard]] bool valid() const { return tape != nullptr && id >= 0; }
};

template <typename Scalar>
class Tape {
 public:
  using Mat = Matrix<Scalar>;
  using Backward = std::function<void(Tape&, int)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<Scalar> constant(Mat value) { return push(std::move(value), nullptr, nullptr, false, {}); }

  /// Leaf referring to externally owned storage. When `grad_sink` is non-null
  /// the accumulated gradient is added to it by backward().
  Var<Scalar> parameter(const Mat& value, Mat* grad_sink) {
    return push(Mat{}, &value, grad_sink, grad_sink != nullptr, {});
  }

  Var<Scalar> record(Mat value, bool requires_grad, Backward backward) {
    return push(std::move(value), nullptr, nullptr, requires_grad, requires_grad ? std::move(backward) : Backward{});
  }

  [[nodiscard]] const Mat& value(int id) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    return n.external ? *n.external : n.value;
  }

  [[nodiscard]] bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }

  /// Gradient buffer for node `id`, zero-initialised on first access.
  Mat& grad(int id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.size() == 0) {
      const Mat& v = value(id);
      n.grad = Mat::Zero(v.rows(), v.cols());
    }
    return n.grad;
  }

  [[nodiscard]] bool has_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad.size() != 0; }

  /// Seeds d(root)/d(root) = 1 for a 1x1 root and sweeps the tape backwards.
  void backward(Var<Scalar> root) {
    if (root.rows() != 1 || root.cols() != 1) {
      throw InvalidInput("backward: root must be a scalar");
    }
    grad(root.id)(0, 0) += Scalar(1);
    for (int id = root.id; id >= 0; --id) {
      Node& n = nodes_[static_cast<std::size_t>(id)];
      if (n.grad.size() == 0 || !n.requires_grad) continue;
      if (n.backward) n.backward(*this, id);
      if (n.grad_sink) *n.grad_sink += n.grad;
    }
  }

  [[nodiscard]] std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    const Mat* external = nullptr;
    Mat* grad_sink = nullptr;
    Mat grad;
    bool requires_grad = false;
    Backward backward;
  };

  Var<Scalar> push(Mat value, const Mat* external, Mat* sink, bool requires_grad, Backward backward) {
    Node n;
    n.value = std::move(value);
    n.external = external;
    n.grad_sink = sink;
    n.requires_grad = requires_grad;
    n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var<Scalar>{this, static_cast<int>(nodes_.size()) - 1};
  }

  std::vector<Node> nodes_;
};

}  // namespace dyst::ad
