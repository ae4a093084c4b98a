#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "geohealth/types.hpp"

namespace geohealth::nn {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  bool valid() const noexcept { return tape_ != nullptr; }
  int id() const noexcept { return id_; }
  Tape* tape() const noexcept { return tape_; }
  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Reverse-mode recorder. Ops append nodes in evaluation order; `backward`
/// walks them in reverse, each node pushing its output gradient to its inputs.
/// Index spans and sparse operators handed to ops must outlive the tape.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Matrix& grad_out)>;

  Var leaf(Matrix value, bool requires_grad = false);
  Var record(Matrix value, std::span<const Var> inputs, BackwardFn backward);

  const Matrix& value(const Var& v) const { return nodes_.at(static_cast<std::size_t>(v.id())).value; }
  bool requires_grad(const Var& v) const { return nodes_.at(static_cast<std::size_t>(v.id())).requires_grad; }

  /// Gradient of the last `backward` root w.r.t. `v` (zeros if unreached).
  Matrix grad(const Var& v) const;

  /// Seeds d(loss)/d(loss) = 1 and propagates. `loss` must be 1x1.
  /// Throws NoRecordedForward when nothing upstream requires a gradient.
  void backward(const Var& loss);

  /// Adds `g` into the gradient slot of `v` (no-op when v needs no gradient).
  void accumulate(const Var& v, const Matrix& g);
  void accumulate(const Var& v, Matrix&& g);

  std::size_t size() const noexcept { return nodes_.size(); }

  /// Sign pattern of every piecewise-linear activation input seen so far.
  /// Finite-difference checks compare patterns to skip coordinates whose
  /// perturbation crosses a kink.
  /// Off by default; only loss probes need it.
  void note_kinks(const Matrix& pre_activation);
  void track_kinks(bool on) noexcept { track_kinks_ = on; }
  const std::vector<std::uint8_t>& kink_pattern() const noexcept { return kinks_; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    BackwardFn backward;
    bool requires_grad = false;
    bool grad_ready = false;
  };
  std::vector<Node> nodes_;
  std::vector<std::uint8_t> kinks_;
  bool track_kinks_ = false;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Fixed linear operator S applied as S * X; keeps S^T for the backward pass.
struct SparseOperator {
  SparseMatrix forward;
  SparseMatrix transpose;

  SparseOperator() = default;
  explicit SparseOperator(SparseMatrix s) : forward(std::move(s)), transpose(forward.transpose()) {}
};

namespace ops {

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
/// a + 1·row (row is 1 x cols(a)).
Var add_row(const Var& a, const Var& row);
Var scale(const Var& a, double factor);
/// a * s with s a 1x1 variable.
Var scale_by(const Var& a, const Var& s);
/// s + c for a 1x1 variable s.
Var add_constant(const Var& s, double c);
Var spmm(const SparseOperator& s, const Var& x);
Var relu(const Var& a);
Var leaky_relu(const Var& a, double slope);
/// Elementwise product with a constant matrix (dropout masks).
Var mul_constant(const Var& a, const Matrix& m);
Var concat_cols(std::span<const Var> parts);
Var mean_of(std::span<const Var> parts);
/// out.row(k) = a.row(index[k])
Var gather_rows(const Var& a, std::span<const Index> index);
/// Softmax of an E x 1 column within segments [offsets[s], offsets[s+1]).
Var segment_softmax(const Var& scores, std::span<const Index> offsets);
/// out.row(target[e]) += weights(e) * messages.row(e); out has `rows` rows.
Var scatter_weighted_sum(const Var& weights, const Var& messages, std::span<const Index> target, Index rows);
/// GATv2 edge logits without materialising E x F:
/// s(e) = sum_f attention(f) * leaky(xs(source[e], f) + xt(target[e], f)).
Var edge_scores(const Var& xs, const Var& xt, const Var& attention, std::span<const Index> source,
                std::span<const Index> target, double slope);
/// out.row(target[e]) += weights(e) * x.row(source[e]).
Var edge_aggregate(const Var& weights, const Var& x, std::span<const Index> source, std::span<const Index> target,
                   Index rows);
/// Mean of (pred - y)^2 over mask; pred is N x 1. Only masked entries of y are read.
Var masked_mse(const Var& pred, const Vector& y, const Mask& mask);

}  // namespace ops
}  // namespace geohealth::nn
