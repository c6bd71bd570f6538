#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "treeformer/tensor.hpp"
#include "treeformer/tree.hpp"

namespace treeformer {

template <class S>
class Tape;

// Handle to a tape node. Ops are free functions over Vars so forward code
// reads like plain matrix expressions.
template <class S>
struct Var {
  Tape<S>* tape = nullptr;
  std::int32_t id = -1;

  const Mat<S>& value() const { return tape->value(id); }
  const Mat<S>& grad() const { return tape->grad(id); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

// Reverse-mode tape. Creation order is the topological order used by
// backward(). Every op checks its output for NaN/Inf.
template <class S>
class Tape {
 public:
  Var<S> constant(Mat<S> v) { return push(std::move(v), false, {}); }

  // Differentiable leaf that is not a stored parameter (tests, probes).
  Var<S> leaf(Mat<S> v) { return push(std::move(v), true, {}); }

  // Differentiable leaf bound to a ParamStore slot; accumulate_param_grads
  // writes its gradient back under `path`.
  Var<S> param(ParamStore<S>& store, const std::string& path) {
    Var<S> var = push(Mat<S>(store.at(path).value), true, {});
    param_bindings_.push_back({var.id, path});
    return var;
  }

  const Mat<S>& value(std::int32_t id) const { return nodes_[check(id)].value; }
  const Mat<S>& grad(std::int32_t id) const { return nodes_[check(id)].grad; }

  // Seeds d(loss)/d(loss) = seed and sweeps the tape in reverse. `loss`
  // must be 1 x 1.
  void backward(Var<S> loss, S seed = S(1)) {
    auto& ln = nodes_[check(loss.id)];
    if (ln.value.rows() != 1 || ln.value.cols() != 1)
      fail(ErrorCode::ShapeMismatch, "backward needs a scalar loss");
    for (auto& n : nodes_)
      if (n.needs_grad) n.grad = Mat<S>::Zero(n.value.rows(), n.value.cols());
    ln.grad(0, 0) = seed;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      if (nodes_[i].needs_grad && nodes_[i].backprop) nodes_[i].backprop();
    }
  }

  void accumulate_param_grads(ParamStore<S>& store) const {
    for (const auto& [id, path] : param_bindings_) {
      const Mat<S>& g = nodes_[static_cast<std::size_t>(id)].grad;
      if (g.size() == 0) continue;  // backward never ran or unreachable
      if (!g.allFinite())
        fail(ErrorCode::NonFinite, "gradient of " + path + " is NaN/Inf");
      store.at(path).grad += g;
    }
  }

  std::size_t size() const { return nodes_.size(); }

  // Instrumentation: number of parent/sibling context-gather passes built on
  // this tape (gather_rows calls; embeds do not count).
  int context_gather_passes = 0;

  // When enabled, relu records how close any pre-activation came to its
  // kink; grad_check uses this to exclude non-differentiable points.
  bool track_relu_margin = false;
  double min_relu_margin = std::numeric_limits<double>::infinity();

  Var<S> push(Mat<S> value, bool needs_grad, std::function<void()> backprop,
              const char* what = "op") {
    check_finite(value, what);
    Node node;
    node.value = std::move(value);
    node.needs_grad = needs_grad;
    node.backprop = std::move(backprop);
    nodes_.push_back(std::move(node));
    return Var<S>{this, static_cast<std::int32_t>(nodes_.size() - 1)};
  }

  // Id the next pushed node will get; ops precompute it so their backward
  // closures can reference their own output.
  std::int32_t next_id() const { return static_cast<std::int32_t>(nodes_.size()); }

  Mat<S>& grad_mut(std::int32_t id) { return nodes_[check(id)].grad; }
  bool needs_grad(std::int32_t id) const { return nodes_[check(id)].needs_grad; }

 private:
  struct Node {
    Mat<S> value;
    Mat<S> grad;
    std::function<void()> backprop;
    bool needs_grad = false;
  };

  std::size_t check(std::int32_t id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
      fail(ErrorCode::BadConfig, "dangling tape handle");
    return static_cast<std::size_t>(id);
  }

  std::vector<Node> nodes_;
  std::vector<std::pair<std::int32_t, std::string>> param_bindings_;
};

namespace detail {
template <class S>
Tape<S>& same_tape(Var<S> a, Var<S> b) {
  if (a.tape == nullptr || a.tape != b.tape)
    fail(ErrorCode::BadConfig, "operands live on different tapes");
  return *a.tape;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// forward ops
// ---------------------------------------------------------------------------

template <class S>
Var<S> matmul(Var<S> a, Var<S> b) {
  Tape<S>& t = detail::same_tape(a, b);
  if (a.cols() != b.rows())
    fail(ErrorCode::ShapeMismatch, "matmul inner dimensions disagree");
  bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
  const std::int32_t out = t.next_id();
  return t.push(a.value() * b.value(), ng,
                [&t, a, b, out]() {
                  const Mat<S>& g = t.grad(out);
                  if (t.needs_grad(a.id)) t.grad_mut(a.id) += g * t.value(b.id).transpose();
                  if (t.needs_grad(b.id)) t.grad_mut(b.id) += t.value(a.id).transpose() * g;
                },
                "matmul");
}

// a * b^T, used for attention scores.
template <class S>
Var<S> matmul_nt(Var<S> a, Var<S> b) {
  Tape<S>& t = detail::same_tape(a, b);
  if (a.cols() != b.cols())
    fail(ErrorCode::ShapeMismatch, "matmul_nt inner dimensions disagree");
  bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
  const std::int32_t out = t.next_id();
  return t.push(a.value() * b.value().transpose(), ng,
                [&t, a, b, out]() {
                  const Mat<S>& g = t.grad(out);
                  if (t.needs_grad(a.id)) t.grad_mut(a.id) += g * t.value(b.id);
                  if (t.needs_grad(b.id)) t.grad_mut(b.id) += g.transpose() * t.value(a.id);
                },
                "matmul_nt");
}

template <class S>
Var<S> add(Var<S> a, Var<S> b) {
  Tape<S>& t = detail::same_tape(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorCode::ShapeMismatch, "add shapes disagree");
  bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
  const std::int32_t out = t.next_id();
  return t.push(a.value() + b.value(), ng,
                [&t, a, b, out]() {
                  const Mat<S>& g = t.grad(out);
                  if (t.needs_grad(a.id)) t.grad_mut(a.id) += g;
                  if (t.needs_grad(b.id)) t.grad_mut(b.id) += g;
                },
                "add");
}

template <class S>
Var<S> operator+(Var<S> a, Var<S> b) {
  return add(a, b);
}

// Broadcasts a 1 x n bias over every row of x.
template <class S>
Var<S> add_bias(Var<S> x, Var<S> bias) {
  Tape<S>& t = detail::same_tape(x, bias);
  if (bias.rows() != 1 || bias.cols() != x.cols())
    fail(ErrorCode::ShapeMismatch, "bias must be 1 x cols(x)");
  bool ng = t.needs_grad(x.id) || t.needs_grad(bias.id);
  Mat<S> v = x.value();
  v.rowwise() += bias.value().row(0);
  const std::int32_t out = t.next_id();
  return t.push(std::move(v), ng,
                [&t, x, bias, out]() {
                  const Mat<S>& g = t.grad(out);
                  if (t.needs_grad(x.id)) t.grad_mut(x.id) += g;
                  if (t.needs_grad(bias.id))
                    t.grad_mut(bias.id).row(0) += g.colwise().sum();
                },
                "add_bias");
}

template <class S>
Var<S> scale(Var<S> x, S c) {
  Tape<S>& t = *x.tape;
  const std::int32_t out = t.next_id();
  return t.push(Mat<S>(x.value() * c), t.needs_grad(x.id),
                [&t, x, c, out]() {
                  if (t.needs_grad(x.id)) t.grad_mut(x.id) += t.grad(out) * c;
                },
                "scale");
}

template <class S>
Var<S> cwise_mul(Var<S> a, Var<S> b) {
  Tape<S>& t = detail::same_tape(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorCode::ShapeMismatch, "cwise_mul shapes disagree");
  bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
  const std::int32_t out = t.next_id();
  return t.push(Mat<S>(a.value().cwiseProduct(b.value())), ng,
                [&t, a, b, out]() {
                  const Mat<S>& g = t.grad(out);
                  if (t.needs_grad(a.id))
                    t.grad_mut(a.id) += g.cwiseProduct(t.value(b.id));
                  if (t.needs_grad(b.id))
                    t.grad_mut(b.id) += g.cwiseProduct(t.value(a.id));
                },
                "cwise_mul");
}

template <class S>
Var<S> relu(Var<S> x) {
  Tape<S>& t = *x.tape;
  if (t.track_relu_margin) {
    double margin = x.value().template cast<double>().cwiseAbs().minCoeff();
    if (margin < t.min_relu_margin) t.min_relu_margin = margin;
  }
  const std::int32_t out = t.next_id();
  return t.push(Mat<S>(x.value().cwiseMax(S(0))), t.needs_grad(x.id),
                [&t, x, out]() {
                  if (!t.needs_grad(x.id)) return;
                  t.grad_mut(x.id).array() +=
                      t.grad(out).array() *
                      (t.value(x.id).array() > S(0)).template cast<S>();
                },
                "relu");
}

namespace detail {

enum class MaskKind { none, causal };

// Stable row softmax; masked entries are exactly 0 in the output and do not
// participate in the max or the normalizer, so masked inputs cannot leak
// into unmasked outputs, not even through rounding.
template <class S>
Mat<S> masked_softmax_value(const Mat<S>& x, MaskKind mask) {
  Mat<S> y = Mat<S>::Zero(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::Index limit = mask == MaskKind::causal
                             ? std::min<Eigen::Index>(i + 1, x.cols())
                             : x.cols();
    S max = x.row(i).head(limit).maxCoeff();
    S total = S(0);
    for (Eigen::Index j = 0; j < limit; ++j) {
      y(i, j) = std::exp(x(i, j) - max);
      total += y(i, j);
    }
    y.row(i).head(limit) /= total;
  }
  return y;
}

template <class S>
Var<S> softmax_impl(Var<S> x, MaskKind mask, const char* what) {
  Tape<S>& t = *x.tape;
  const std::int32_t out = t.next_id();
  return t.push(masked_softmax_value(x.value(), mask), t.needs_grad(x.id),
                [&t, x, out]() {
                  if (!t.needs_grad(x.id)) return;
                  const Mat<S>& y = t.value(out);
                  const Mat<S>& g = t.grad(out);
                  Mat<S>& gx = t.grad_mut(x.id);
                  for (Eigen::Index i = 0; i < y.rows(); ++i) {
                    S dot = y.row(i).dot(g.row(i));
                    gx.row(i).array() +=
                        y.row(i).array() * (g.row(i).array() - dot);
                  }
                },
                what);
}

}  // namespace detail

template <class S>
Var<S> softmax_rows(Var<S> x) {
  return detail::softmax_impl(x, detail::MaskKind::none, "softmax_rows");
}

// Row i attends to columns j <= i; columns beyond i are exactly zero.
template <class S>
Var<S> causal_softmax_rows(Var<S> x) {
  if (x.rows() != x.cols())
    fail(ErrorCode::ShapeMismatch, "causal softmax needs a square score matrix");
  return detail::softmax_impl(x, detail::MaskKind::causal, "causal_softmax_rows");
}

template <class S>
Var<S> log_softmax_rows(Var<S> x) {
  Tape<S>& t = *x.tape;
  Mat<S> y = x.value();
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    S max = y.row(i).maxCoeff();
    S lse = std::log((y.row(i).array() - max).exp().sum()) + max;
    y.row(i).array() -= lse;
  }
  const std::int32_t out = t.next_id();
  return t.push(std::move(y), t.needs_grad(x.id),
                [&t, x, out]() {
                  if (!t.needs_grad(x.id)) return;
                  const Mat<S>& logp = t.value(out);
                  const Mat<S>& g = t.grad(out);
                  Mat<S>& gx = t.grad_mut(x.id);
                  for (Eigen::Index i = 0; i < logp.rows(); ++i) {
                    S gsum = g.row(i).sum();
                    gx.row(i).array() +=
                        g.row(i).array() - logp.row(i).array().exp() * gsum;
                  }
                },
                "log_softmax_rows");
}

template <class S>
Var<S> layer_norm(Var<S> x, Var<S> gain, Var<S> bias, S eps) {
  Tape<S>& t = detail::same_tape(x, gain);
  detail::same_tape(gain, bias);
  if (gain.rows() != 1 || gain.cols() != x.cols() || bias.rows() != 1 ||
      bias.cols() != x.cols())
    fail(ErrorCode::ShapeMismatch, "layer_norm gain/bias must be 1 x cols(x)");
  Mat<S> xhat(x.rows(), x.cols());
  Mat<S> inv_sigma(x.rows(), 1);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    S mean = x.value().row(i).mean();
    auto centered = (x.value().row(i).array() - mean).eval();
    S var = centered.square().mean();
    inv_sigma(i, 0) = S(1) / std::sqrt(var + eps);
    xhat.row(i) = centered * inv_sigma(i, 0);
  }
  Mat<S> y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    y.row(i) = xhat.row(i).cwiseProduct(gain.value().row(0)) + bias.value().row(0);
  bool ng = t.needs_grad(x.id) || t.needs_grad(gain.id) || t.needs_grad(bias.id);
  const std::int32_t out = t.next_id();
  return t.push(std::move(y), ng,
                [&t, x, gain, bias, out, xhat, inv_sigma]() {
                  const Mat<S>& g = t.grad(out);
                  if (t.needs_grad(gain.id))
                    t.grad_mut(gain.id).row(0) +=
                        (g.array() * xhat.array()).colwise().sum().matrix();
                  if (t.needs_grad(bias.id))
                    t.grad_mut(bias.id).row(0) += g.colwise().sum();
                  if (!t.needs_grad(x.id)) return;
                  Mat<S>& gx = t.grad_mut(x.id);
                  for (Eigen::Index i = 0; i < g.rows(); ++i) {
                    auto gy =
                        (g.row(i).array() * t.value(gain.id).row(0).array()).eval();
                    S mean_gy = gy.mean();
                    S mean_gy_xhat = (gy * xhat.row(i).array()).mean();
                    gx.row(i).array() +=
                        inv_sigma(i, 0) *
                        (gy - mean_gy - xhat.row(i).array() * mean_gy_xhat);
                  }
                },
                "layer_norm");
}

// Embedding lookup: rows of `table` selected by token id.
template <class S>
Var<S> embed(Var<S> table, const std::vector<std::int32_t>& ids) {
  Tape<S>& t = *table.tape;
  Mat<S> v(static_cast<Eigen::Index>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.rows())
      fail(ErrorCode::TokenOutOfRange,
           "token id " + std::to_string(ids[i]) + " outside embedding table");
    v.row(static_cast<Eigen::Index>(i)) = table.value().row(ids[i]);
  }
  const std::int32_t out = t.next_id();
  return t.push(std::move(v), t.needs_grad(table.id),
                [&t, table, out, ids]() {
                  if (!t.needs_grad(table.id)) return;
                  const Mat<S>& g = t.grad(out);
                  Mat<S>& gt = t.grad_mut(table.id);
                  for (std::size_t i = 0; i < ids.size(); ++i)
                    gt.row(ids[i]) += g.row(static_cast<Eigen::Index>(i));
                },
                "embed");
}

// Batched context gather: row i of the result is x.row(idx[i]), or the
// learned `missing` row where idx[i] is k_no_index. One call fetches the
// whole parent (or sibling) column for a layer.
template <class S>
Var<S> gather_rows(Var<S> x, const std::vector<std::int32_t>& idx, Var<S> missing) {
  Tape<S>& t = detail::same_tape(x, missing);
  if (missing.rows() != 1 || missing.cols() != x.cols())
    fail(ErrorCode::ShapeMismatch, "missing-context vector must be 1 x cols(x)");
  ++t.context_gather_passes;
  Mat<S> v(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] == k_no_index) {
      v.row(static_cast<Eigen::Index>(i)) = missing.value().row(0);
    } else {
      if (idx[i] < 0 || idx[i] >= x.rows())
        fail(ErrorCode::MaskViolation, "gather index out of range");
      v.row(static_cast<Eigen::Index>(i)) = x.value().row(idx[i]);
    }
  }
  bool ng = t.needs_grad(x.id) || t.needs_grad(missing.id);
  const std::int32_t out = t.next_id();
  return t.push(std::move(v), ng,
                [&t, x, missing, out, idx]() {
                  const Mat<S>& g = t.grad(out);
                  for (std::size_t i = 0; i < idx.size(); ++i) {
                    auto row = static_cast<Eigen::Index>(i);
                    if (idx[i] == k_no_index) {
                      if (t.needs_grad(missing.id))
                        t.grad_mut(missing.id).row(0) += g.row(row);
                    } else if (t.needs_grad(x.id)) {
                      t.grad_mut(x.id).row(idx[i]) += g.row(row);
                    }
                  }
                },
                "gather_rows");
}

// Inverted dropout: kept units scale by 1/(1-p). Identity when p == 0 or in
// eval mode.
template <class S>
Var<S> dropout(Var<S> x, double p, Rng& rng, RunMode mode) {
  if (p < 0.0 || p >= 1.0) fail(ErrorCode::BadConfig, "dropout needs 0 <= p < 1");
  if (mode == RunMode::eval || p == 0.0) return x;
  Tape<S>& t = *x.tape;
  std::bernoulli_distribution keep(1.0 - p);
  Mat<S> mask(x.rows(), x.cols());
  const S inv = S(1.0 / (1.0 - p));
  for (Eigen::Index i = 0; i < mask.rows(); ++i)
    for (Eigen::Index j = 0; j < mask.cols(); ++j)
      mask(i, j) = keep(rng) ? inv : S(0);
  const std::int32_t out = t.next_id();
  return t.push(Mat<S>(x.value().cwiseProduct(mask)), t.needs_grad(x.id),
                [&t, x, out, mask]() {
                  if (t.needs_grad(x.id))
                    t.grad_mut(x.id) += t.grad(out).cwiseProduct(mask);
                },
                "dropout");
}

// Whole-row word dropout on an embedded sequence: each row independently
// zeroed with probability p, no rescaling. Identity in eval mode or at p=0.
template <class S>
Var<S> word_dropout(Var<S> x, double p, Rng& rng, RunMode mode) {
  if (p < 0.0 || p >= 1.0) fail(ErrorCode::BadConfig, "word_dropout needs 0 <= p < 1");
  if (mode == RunMode::eval || p == 0.0) return x;
  Tape<S>& t = *x.tape;
  std::bernoulli_distribution drop(p);
  std::vector<char> dropped(static_cast<std::size_t>(x.rows()));
  Mat<S> v = x.value();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    dropped[static_cast<std::size_t>(i)] = drop(rng) ? 1 : 0;
    if (dropped[static_cast<std::size_t>(i)]) v.row(i).setZero();
  }
  const std::int32_t out = t.next_id();
  return t.push(std::move(v), t.needs_grad(x.id),
                [&t, x, out, dropped]() {
                  if (!t.needs_grad(x.id)) return;
                  const Mat<S>& g = t.grad(out);
                  Mat<S>& gx = t.grad_mut(x.id);
                  for (Eigen::Index i = 0; i < g.rows(); ++i)
                    if (!dropped[static_cast<std::size_t>(i)]) gx.row(i) += g.row(i);
                },
                "word_dropout");
}

template <class S>
Var<S> slice_cols(Var<S> x, Eigen::Index start, Eigen::Index n) {
  Tape<S>& t = *x.tape;
  if (start < 0 || n <= 0 || start + n > x.cols())
    fail(ErrorCode::ShapeMismatch, "slice_cols out of range");
  const std::int32_t out = t.next_id();
  return t.push(Mat<S>(x.value().middleCols(start, n)), t.needs_grad(x.id),
                [&t, x, out, start, n]() {
                  if (t.needs_grad(x.id))
                    t.grad_mut(x.id).middleCols(start, n) += t.grad(out);
                },
                "slice_cols");
}

template <class S>
Var<S> concat_cols(const std::vector<Var<S>>& parts) {
  if (parts.empty()) fail(ErrorCode::ShapeMismatch, "concat_cols of nothing");
  Tape<S>& t = *parts[0].tape;
  Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  bool ng = false;
  for (const auto& p : parts) {
    if (p.rows() != rows) fail(ErrorCode::ShapeMismatch, "concat_cols row mismatch");
    cols += p.cols();
    ng = ng || t.needs_grad(p.id);
  }
  Mat<S> v(rows, cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    v.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  const std::int32_t out = t.next_id();
  return t.push(std::move(v), ng,
                [&t, parts, out]() {
                  const Mat<S>& g = t.grad(out);
                  Eigen::Index at = 0;
                  for (const auto& p : parts) {
                    if (t.needs_grad(p.id))
                      t.grad_mut(p.id) += g.middleCols(at, p.cols());
                    at += p.cols();
                  }
                },
                "concat_cols");
}

template <class S>
Var<S> sum(Var<S> x) {
  Tape<S>& t = *x.tape;
  Mat<S> v(1, 1);
  v(0, 0) = x.value().sum();
  const std::int32_t out = t.next_id();
  return t.push(std::move(v), t.needs_grad(x.id),
                [&t, x, out]() {
                  if (t.needs_grad(x.id))
                    t.grad_mut(x.id).array() += t.grad(out)(0, 0);
                },
                "sum");
}

// sum(x .* weights) with constant weights.
template <class S>
Var<S> weighted_sum(Var<S> x, Mat<S> weights) {
  Tape<S>& t = *x.tape;
  if (weights.rows() != x.rows() || weights.cols() != x.cols())
    fail(ErrorCode::ShapeMismatch, "weighted_sum shapes disagree");
  Mat<S> v(1, 1);
  v(0, 0) = x.value().cwiseProduct(weights).sum();
  const std::int32_t out = t.next_id();
  return t.push(std::move(v), t.needs_grad(x.id),
                [&t, x, out, weights]() {
                  if (t.needs_grad(x.id))
                    t.grad_mut(x.id) += weights * t.grad(out)(0, 0);
                },
                "weighted_sum");
}

// Column vector of x(i, ids[i]), one picked entry per row.
template <class S>
Var<S> rows_pick(Var<S> x, const std::vector<std::int32_t>& ids) {
  Tape<S>& t = *x.tape;
  if (static_cast<Eigen::Index>(ids.size()) != x.rows())
    fail(ErrorCode::ShapeMismatch, "rows_pick needs one id per row");
  Mat<S> v(x.rows(), 1);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= x.cols())
      fail(ErrorCode::TokenOutOfRange, "picked column out of range");
    v(static_cast<Eigen::Index>(i), 0) = x.value()(static_cast<Eigen::Index>(i), ids[i]);
  }
  const std::int32_t out = t.next_id();
  return t.push(std::move(v), t.needs_grad(x.id),
                [&t, x, out, ids]() {
                  if (!t.needs_grad(x.id)) return;
                  const Mat<S>& g = t.grad(out);
                  Mat<S>& gx = t.grad_mut(x.id);
                  for (std::size_t i = 0; i < ids.size(); ++i)
                    gx(static_cast<Eigen::Index>(i), ids[i]) +=
                        g(static_cast<Eigen::Index>(i), 0);
                },
                "rows_pick");
}

}  // namespace treeformer
