#pragma once

// Differentiable matrix operations recorded on a Tape.

#include <cmath>
#include <span>
#include <vector>

#include "dyst/autodiff/tape.hpp"

namespace dyst::ad {

namespace detail {

template <typename Scalar>
bool any_requires_grad(std::initializer_list<Var<Scalar>> vars) {
  for (const auto& v : vars) {
    if (v.tape->requires_grad(v.id)) return true;
  }
  return false;
}

template <typename Scalar>
void check_same_tape(const Var<Scalar>& a, const Var<Scalar>& b) {
  if (a.tape != b.tape) throw InvalidInput("autodiff: operands recorded on different tapes");
}

}  // namespace detail

/// a * b
template <typename Scalar>
Var<Scalar> matmul(Var<Scalar> a, Var<Scalar> b) {
  detail::check_same_tape(a, b);
  if (a.cols() != b.rows()) throw InvalidInput("matmul: inner dimensions differ");
  Tape<Scalar>& t = *a.tape;
  Matrix<Scalar> out = a.value() * b.value();
  return t.record(std::move(out), detail::any_requires_grad({a, b}), [a, b](Tape<Scalar>& tp, int self) {
    const auto& g = tp.grad(self);
    if (tp.requires_grad(a.id)) tp.grad(a.id).noalias() += g * tp.value(b.id).transpose();
    if (tp.requires_grad(b.id)) tp.grad(b.id).noalias() += tp.value(a.id).transpose() * g;
  });
}

/// x * w + b, with b a 1 x n row broadcast over rows.
template <typename Scalar>
Var<Scalar> linear(Var<Scalar> x, Var<Scalar> w, Var<Scalar> b) {
  if (x.cols() != w.rows() || b.rows() != 1 || b.cols() != w.cols()) {
    throw InvalidInput("linear: shape mismatch");
  }
  Tape<Scalar>& t = *x.tape;
  Matrix<Scalar> out = x.value() * w.value();
  out.rowwise() += b.value().row(0);
  return t.record(std::move(out), detail::any_requires_grad({x, w, b}), [x, w, b](Tape<Scalar>& tp, int self) {
    const auto& g = tp.grad(self);
    if (tp.requires_grad(x.id)) tp.grad(x.id).noalias() += g * tp.value(w.id).transpose();
    if (tp.requires_grad(w.id)) tp.grad(w.id).noalias() += tp.value(x.id).transpose() * g;
    if (tp.requires_grad(b.id)) tp.grad(b.id) += g.colwise().sum();
  });
}

template <typename Scalar>
Var<Scalar> add(Var<Scalar> a, Var<Scalar> b) {
  detail::check_same_tape(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidInput("add: shape mismatch");
  Tape<Scalar>& t = *a.tape;
  Matrix<Scalar> out = a.value() + b.value();
  return t.record(std::move(out), detail::any_requires_grad({a, b}), [a, b](Tape<Scalar>& tp, int self) {
    const auto& g = tp.grad(self);
    if (tp.requires_grad(a.id)) tp.grad(a.id) += g;
    if (tp.requires_grad(b.id)) tp.grad(b.id) += g;
  });
}

/// a + row, broadcasting a 1 x n row over every row of a.
template <typename Scalar>
Var<Scalar> add_row(Var<Scalar> a, Var<Scalar> row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw InvalidInput("add_row: shape mismatch");
  Tape<Scalar>& t = *a.tape;
  Matrix<Scalar> out = a.value();
  out.rowwise() += row.value().row(0);
  return t.record(std::move(out), detail::any_requires_grad({a, row}), [a, row](Tape<Scalar>& tp, int self) {
    const auto& g = tp.grad(self);
    if (tp.requires_grad(a.id)) tp.grad(a.id) += g;
    if (tp.requires_grad(row.id)) tp.grad(row.id) += g.colwise().sum();
  });
}

template <typename Scalar>
Var<Scalar> scale(Var<Scalar> a, Scalar s) {
  Tape<Scalar>& t = *a.tape;
  Matrix<Scalar> out = a.value() * s;
  return t.record(std::move(out), detail::any_requires_grad({a}), [a, s](Tape<Scalar>& tp, int self) {
    tp.grad(a.id) += tp.grad(self) * s;
  });
}

/// Identity on the forward pass; multiplies the incoming gradient by `s`.
template <typename Scalar>
Var<Scalar> scale_grad(Var<Scalar> a, Scalar s) {
  Tape<Scalar>& t = *a.tape;
  Matrix<Scalar> out = a.value();
  return t.record(std::move(out), detail::any_requires_grad({a}), [a, s](Tape<Scalar>& tp, int self) {
    tp.grad(a.id) += tp.grad(self) * s;
  });
}

/// tanh approximation of GELU.
template <typename Scalar>
Var<Scalar> gelu(Var<Scalar> a) {
  Tape<Scalar>& t = *a.tape;
  const Scalar k = Scalar(0.7978845608028654);  // sqrt(2 / pi)
  const Scalar c = Scalar(0.044715);
  const auto& x = a.value().array();
  Matrix<Scalar> out = (Scalar(0.5) * x * (Scalar(1) + (k * (x + c * x.cube())).tanh())).matrix();
  return t.record(std::move(out), detail::any_requires_grad({a}), [a, k, c](Tape<Scalar>& tp, int self) {
    const auto& xv = tp.value(a.id).array();
    const auto th = (k * (xv + c * xv.cube())).tanh().eval();
    const auto dy = (Scalar(0.5) * (Scalar(1) + th) +
                     Scalar(0.5) * xv * (Scalar(1) - th.square()) * k * (Scalar(1) + Scalar(3) * c * xv.square()))
                        .eval();
    tp.grad(a.id).array() += tp.grad(self).array() * dy;
  });
}

template <typename Scalar>
Var<Scalar> sigmoid(Var<Scalar> a) {
  Tape<Scalar>& t = *a.tape;
  Matrix<Scalar> out = (Scalar(1) / (Scalar(1) + (-a.value().array()).exp())).matrix();
  return t.record(std::move(out), detail::any_requires_grad({a}), [a](Tape<Scalar>& tp, int self) {
    const auto& y = tp.value(self).array();
    tp.grad(a.id).array() += tp.grad(self).array() * y * (Scalar(1) - y);
  });
}

/// Row-wise layer normalisation with learned gain and bias (both 1 x n).
template <typename Scalar>
Var<Scalar> layer_norm(Var<Scalar> x, Var<Scalar> gain, Var<Scalar> bias, Scalar eps = Scalar(1e-5)) {
  const Eigen::Index n = x.cols();
  if (gain.cols() != n || bias.cols() != n) throw InvalidInput("layer_norm: shape mismatch");
  Tape<Scalar>& t = *x.tape;
  const auto& xv = x.value();
  Matrix<Scalar> xhat(xv.rows(), n);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv_std(xv.rows());
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    const Scalar mean = xv.row(r).mean();
    const auto centered = (xv.row(r).array() - mean).eval();
    const Scalar var = centered.square().mean();
    inv_std(r) = Scalar(1) / std::sqrt(var + eps);
    xhat.row(r) = centered * inv_std(r);
  }
  Matrix<Scalar> out = (xhat.array().rowwise() * gain.value().row(0).array()).matrix();
  out.rowwise() += bias.value().row(0);
  return t.record(std::move(out), detail::any_requires_grad({x, gain, bias}),
                  [x, gain, bias, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape<Scalar>& tp, int self) {
                    const auto& g = tp.grad(self);
                    if (tp.requires_grad(gain.id)) {
                      tp.grad(gain.id) += (g.array() * xhat.array()).colwise().sum().matrix();
                    }
                    if (tp.requires_grad(bias.id)) tp.grad(bias.id) += g.colwise().sum();
                    if (!tp.requires_grad(x.id)) return;
                    const auto gx = (g.array().rowwise() * tp.value(gain.id).row(0).array()).eval();
                    const Scalar inv_n = Scalar(1) / Scalar(xhat.cols());
                    auto& dx = tp.grad(x.id);
                    for (Eigen::Index r = 0; r < gx.rows(); ++r) {
                      const Scalar m1 = gx.row(r).sum() * inv_n;
                      const Scalar m2 = (gx.row(r) * xhat.row(r).array()).sum() * inv_n;
                      dx.row(r).array() += inv_std(r) * (gx.row(r) - m1 - xhat.row(r).array() * m2);
                    }
                  });
}

/// Multi-head scaled dot-product attention. q is n x d, k and v are m x d;
/// the feature axis is split into `heads` contiguous blocks.
template <typename Scalar>
Var<Scalar> attention(Var<Scalar> q, Var<Scalar> k, Var<Scalar> v, int heads) {
  const Eigen::Index d = q.cols();
  if (k.cols() != d || v.cols() != d || k.rows() != v.rows() || heads <= 0 || d % heads != 0) {
    throw InvalidInput("attention: shape mismatch");
  }
  if (k.rows() == 0) throw InvalidInput("attention: empty key set");
  Tape<Scalar>& t = *q.tape;
  const Eigen::Index dh = d / heads;
  const Scalar inv_sqrt = Scalar(1) / std::sqrt(static_cast<Scalar>(dh));
  const auto& qv = q.value();
  const auto& kv = k.value();
  const auto& vv = v.value();
  std::vector<Matrix<Scalar>> probs(static_cast<std::size_t>(heads));
  Matrix<Scalar> out(qv.rows(), d);
  for (int h = 0; h < heads; ++h) {
    const Eigen::Index c0 = h * dh;
    Matrix<Scalar> s = (qv.middleCols(c0, dh) * kv.middleCols(c0, dh).transpose()) * inv_sqrt;
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
      const Scalar mx = s.row(r).maxCoeff();
      s.row(r) = (s.row(r).array() - mx).exp();
      s.row(r) /= s.row(r).sum();
    }
    out.middleCols(c0, dh).noalias() = s * vv.middleCols(c0, dh);
    probs[static_cast<std::size_t>(h)] = std::move(s);
  }
  return t.record(std::move(out), detail::any_requires_grad({q, k, v}),
                  [q, k, v, heads, dh, inv_sqrt, probs = std::move(probs)](Tape<Scalar>& tp, int self) {
                    const auto& g = tp.grad(self);
                    const auto& qv2 = tp.value(q.id);
                    const auto& kv2 = tp.value(k.id);
                    const auto& vv2 = tp.value(v.id);
                    const bool gq = tp.requires_grad(q.id);
                    const bool gk = tp.requires_grad(k.id);
                    const bool gv = tp.requires_grad(v.id);
                    for (int h = 0; h < heads; ++h) {
                      const Eigen::Index c0 = h * dh;
                      const auto& a = probs[static_cast<std::size_t>(h)];
                      const auto gh = g.middleCols(c0, dh);
                      if (gv) tp.grad(v.id).middleCols(c0, dh).noalias() += a.transpose() * gh;
                      if (!gq && !gk) continue;
                      Matrix<Scalar> da = gh * vv2.middleCols(c0, dh).transpose();
                      const auto row_dot = (da.array() * a.array()).rowwise().sum().eval();
                      Matrix<Scalar> ds = (a.array() * (da.array().colwise() - row_dot)).matrix() * inv_sqrt;
                      if (gq) tp.grad(q.id).middleCols(c0, dh).noalias() += ds * kv2.middleCols(c0, dh);
                      if (gk) tp.grad(k.id).middleCols(c0, dh).noalias() += ds.transpose() * qv2.middleCols(c0, dh);
                    }
                  });
}

/// [a, b] side by side.
template <typename Scalar>
Var<Scalar> concat_cols(Var<Scalar> a, Var<Scalar> b) {
  detail::check_same_tape(a, b);
  if (a.rows() != b.rows()) throw InvalidInput("concat_cols: row counts differ");
  Tape<Scalar>& t = *a.tape;
  Matrix<Scalar> out(a.rows(), a.cols() + b.cols());
  out << a.value(), b.value();
  const Eigen::Index ca = a.cols();
  const Eigen::Index cb = b.cols();
  return t.record(std::move(out), detail::any_requires_grad({a, b}), [a, b, ca, cb](Tape<Scalar>& tp, int self) {
    const auto& g = tp.grad(self);
    if (tp.requires_grad(a.id)) tp.grad(a.id) += g.leftCols(ca);
    if (tp.requires_grad(b.id)) tp.grad(b.id) += g.rightCols(cb);
  });
}

/// Stacks the parts vertically.
template <typename Scalar>
Var<Scalar> concat_rows(std::span<const Var<Scalar>> parts) {
  if (parts.empty()) throw InvalidInput("concat_rows: nothing to concatenate");
  Tape<Scalar>& t = *parts.front().tape;
  const Eigen::Index cols = parts.front().cols();
  Eigen::Index rows = 0;
  bool needs = false;
  for (const auto& p : parts) {
    if (p.cols() != cols || p.tape != &t) throw InvalidInput("concat_rows: incompatible parts");
    rows += p.rows();
    needs = needs || t.requires_grad(p.id);
  }
  Matrix<Scalar> out(rows, cols);
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  std::vector<Var<Scalar>> inputs(parts.begin(), parts.end());
  return t.record(std::move(out), needs, [inputs = std::move(inputs)](Tape<Scalar>& tp, int self) {
    const auto& g = tp.grad(self);
    Eigen::Index r0 = 0;
    for (const auto& p : inputs) {
      const Eigen::Index n = p.rows();
      if (tp.requires_grad(p.id)) tp.grad(p.id) += g.middleRows(r0, n);
      r0 += n;
    }
  });
}

template <typename Scalar>
Var<Scalar> slice_rows(Var<Scalar> a, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count < 0 || begin + count > a.rows()) throw InvalidInput("slice_rows: out of range");
  Tape<Scalar>& t = *a.tape;
  Matrix<Scalar> out = a.value().middleRows(begin, count);
  return t.record(std::move(out), detail::any_requires_grad({a}), [a, begin, count](Tape<Scalar>& tp, int self) {
    tp.grad(a.id).middleRows(begin, count) += tp.grad(self);
  });
}

/// out.row(i) = a.row(index[i]); indices may repeat.
template <typename Scalar>
Var<Scalar> gather_rows(Var<Scalar> a, std::vector<int> index) {
  Tape<Scalar>& t = *a.tape;
  const auto& av = a.value();
  Matrix<Scalar> out(static_cast<Eigen::Index>(index.size()), av.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= av.rows()) throw InvalidInput("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(i)) = av.row(index[i]);
  }
  return t.record(std::move(out), detail::any_requires_grad({a}), [a, index = std::move(index)](Tape<Scalar>& tp, int self) {
    const auto& g = tp.grad(self);
    auto& ga = tp.grad(a.id);
    for (std::size_t i = 0; i < index.size(); ++i) ga.row(index[i]) += g.row(static_cast<Eigen::Index>(i));
  });
}

/// 1 x n column means.
template <typename Scalar>
Var<Scalar> mean_rows(Var<Scalar> a) {
  if (a.rows() == 0) throw InvalidInput("mean_rows: empty input");
  Tape<Scalar>& t = *a.tape;
  Matrix<Scalar> out = a.value().colwise().mean();
  return t.record(std::move(out), detail::any_requires_grad({a}), [a](Tape<Scalar>& tp, int self) {
    const Scalar inv = Scalar(1) / Scalar(tp.value(a.id).rows());
    tp.grad(a.id).rowwise() += tp.grad(self).row(0) * inv;
  });
}

/// Mean of the squared difference over every entry; `target` is constant.
template <typename Scalar>
Var<Scalar> mse(Var<Scalar> pred, const Matrix<Scalar>& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) throw InvalidInput("mse: shape mismatch");
  Tape<Scalar>& t = *pred.tape;
  Matrix<Scalar> diff = pred.value() - target;
  const Scalar n = Scalar(diff.size());
  Matrix<Scalar> out(1, 1);
  out(0, 0) = diff.squaredNorm() / n;
  return t.record(std::move(out), detail::any_requires_grad({pred}),
                  [pred, diff = std::move(diff), n](Tape<Scalar>& tp, int self) {
                    tp.grad(pred.id) += diff * (Scalar(2) * tp.grad(self)(0, 0) / n);
                  });
}

/// Sum of a list of 1 x 1 values.
template <typename Scalar>
Var<Scalar> sum_scalars(std::span<const Var<Scalar>> parts) {
  if (parts.empty()) throw InvalidInput("sum_scalars: nothing to sum");
  Tape<Scalar>& t = *parts.front().tape;
  Matrix<Scalar> out = Matrix<Scalar>::Zero(1, 1);
  bool needs = false;
  for (const auto& p : parts) {
    if (p.rows() != 1 || p.cols() != 1) throw InvalidInput("sum_scalars: non-scalar part");
    out(0, 0) += p.value()(0, 0);
    needs = needs || t.requires_grad(p.id);
  }
  std::vector<Var<Scalar>> inputs(parts.begin(), parts.end());
  return t.record(std::move(out), needs, [inputs = std::move(inputs)](Tape<Scalar>& tp, int self) {
    const Scalar g = tp.grad(self)(0, 0);
    for (const auto& p : inputs) {
      if (tp.requires_grad(p.id)) tp.grad(p.id)(0, 0) += g;
    }
  });
}

/// Unfolds k x k patches of an (h*w) x c feature map, zero padded by `pad`,
/// into rows of an (ho*wo) x (k*k*c) matrix. Column layout is (ky, kx, c).
template <typename Scalar>
Var<Scalar> im2col(Var<Scalar> x, int height, int width, int kernel, int stride, int pad) {
  const Eigen::Index channels = x.cols();
  if (x.rows() != static_cast<Eigen::Index>(height) * width) throw InvalidInput("im2col: feature map size mismatch");
  const int ho = (height + 2 * pad - kernel) / stride + 1;
  const int wo = (width + 2 * pad - kernel) / stride + 1;
  if (ho <= 0 || wo <= 0) throw InvalidInput("im2col: kernel larger than input");
  Tape<Scalar>& t = *x.tape;
  const auto& xv = x.value();
  Matrix<Scalar> out = Matrix<Scalar>::Zero(static_cast<Eigen::Index>(ho) * wo, kernel * kernel * channels);
  for (int oy = 0; oy < ho; ++oy) {
    for (int ox = 0; ox < wo; ++ox) {
      const Eigen::Index row = static_cast<Eigen::Index>(oy) * wo + ox;
      for (int ky = 0; ky < kernel; ++ky) {
        const int iy = oy * stride + ky - pad;
        if (iy < 0 || iy >= height) continue;
        for (int kx = 0; kx < kernel; ++kx) {
          const int ix = ox * stride + kx - pad;
          if (ix < 0 || ix >= width) continue;
          out.row(row).segment((ky * kernel + kx) * channels, channels) =
              xv.row(static_cast<Eigen::Index>(iy) * width + ix);
        }
      }
    }
  }
  return t.record(std::move(out), detail::any_requires_grad({x}),
                  [x, height, width, kernel, stride, pad, ho, wo, channels](Tape<Scalar>& tp, int self) {
                    const auto& g = tp.grad(self);
                    auto& gx = tp.grad(x.id);
                    for (int oy = 0; oy < ho; ++oy) {
                      for (int ox = 0; ox < wo; ++ox) {
                        const Eigen::Index row = static_cast<Eigen::Index>(oy) * wo + ox;
                        for (int ky = 0; ky < kernel; ++ky) {
                          const int iy = oy * stride + ky - pad;
                          if (iy < 0 || iy >= height) continue;
                          for (int kx = 0; kx < kernel; ++kx) {
                            const int ix = ox * stride + kx - pad;
                            if (ix < 0 || ix >= width) continue;
                            gx.row(static_cast<Eigen::Index>(iy) * width + ix) +=
                                g.row(row).segment((ky * kernel + kx) * channels, channels);
                          }
                        }
                      }
                    }
                  });
}

}  // namespace dyst::ad
