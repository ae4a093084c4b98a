#include "geohealth/nn/tape.hpp"

#include <cmath>

#include "geohealth/error.hpp"

namespace geohealth::nn {

const Matrix& Var::value() const {
  if (tape_ == nullptr) throw Error(ErrorCode::InvalidArgument, "use of an empty Var");
  return tape_->value(*this);
}

Var Tape::leaf(Matrix value, bool requires_grad) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::record(Matrix value, std::span<const Var> inputs, BackwardFn backward) {
  bool needs = false;
  for (const Var& in : inputs) {
    if (in.tape() != this) throw Error(ErrorCode::InvalidArgument, "Var recorded on a different tape");
    needs = needs || requires_grad(in);
  }
  Node node;
  node.value = std::move(value);
  node.requires_grad = needs;
  if (needs) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Matrix Tape::grad(const Var& v) const {
  const Node& node = nodes_.at(static_cast<std::size_t>(v.id()));
  if (!node.grad_ready) return Matrix::Zero(node.value.rows(), node.value.cols());
  return node.grad;
}

void Tape::accumulate(const Var& v, const Matrix& g) {
  Node& node = nodes_.at(static_cast<std::size_t>(v.id()));
  if (!node.requires_grad) return;
  if (!node.grad_ready) {
    node.grad = g;
    node.grad_ready = true;
  } else {
    node.grad += g;
  }
}

void Tape::accumulate(const Var& v, Matrix&& g) {
  Node& node = nodes_.at(static_cast<std::size_t>(v.id()));
  if (!node.requires_grad) return;
  if (!node.grad_ready) {
    node.grad = std::move(g);
    node.grad_ready = true;
  } else {
    node.grad += g;
  }
}

void Tape::backward(const Var& loss) {
  if (!loss.valid() || loss.tape() != this || nodes_.empty())
    throw Error(ErrorCode::NoRecordedForward, "backward called without a recorded forward pass");
  Node& root = nodes_.at(static_cast<std::size_t>(loss.id()));
  if (root.value.rows() != 1 || root.value.cols() != 1)
    throw Error(ErrorCode::ShapeMismatch, "backward root must be a scalar");
  if (!root.requires_grad) throw Error(ErrorCode::NoRecordedForward, "loss does not depend on any parameter");
  for (Node& n : nodes_) n.grad_ready = false;
  root.grad = Matrix::Ones(1, 1);
  root.grad_ready = true;
  for (int i = loss.id(); i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.grad_ready && n.backward) n.backward(*this, n.grad);
  }
}

void Tape::note_kinks(const Matrix& pre_activation) {
  if (!track_kinks_) return;
  const std::size_t at = kinks_.size();
  kinks_.resize(at + static_cast<std::size_t>(pre_activation.size()));
  const double* p = pre_activation.data();
  for (Index k = 0; k < pre_activation.size(); ++k) kinks_[at + static_cast<std::size_t>(k)] = p[k] > 0.0;
}

namespace ops {

namespace {

void require_same_tape(const Var& a, const Var& b) {
  if (!a.valid() || a.tape() != b.tape()) throw Error(ErrorCode::InvalidArgument, "operands on different tapes");
}

void require_shape(bool ok, const char* op, const Var& a, const Var& b) {
  if (!ok)
    throw Error(ErrorCode::ShapeMismatch, std::string(op) + ": " + std::to_string(a.rows()) + "x" +
                                              std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                              std::to_string(b.cols()));
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  require_same_tape(a, b);
  require_shape(a.cols() == b.rows(), "matmul", a, b);
  Tape& t = *a.tape();
  const Var in[] = {a, b};
  return t.record(a.value() * b.value(), in, [a, b](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, g * tp.value(b).transpose());
    if (tp.requires_grad(b)) tp.accumulate(b, tp.value(a).transpose() * g);
  });
}

Var add(const Var& a, const Var& b) {
  require_same_tape(a, b);
  require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "add", a, b);
  Tape& t = *a.tape();
  const Var in[] = {a, b};
  return t.record(a.value() + b.value(), in, [a, b](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var add_row(const Var& a, const Var& row) {
  require_same_tape(a, row);
  require_shape(row.rows() == 1 && row.cols() == a.cols(), "add_row", a, row);
  Tape& t = *a.tape();
  const Var in[] = {a, row};
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  return t.record(std::move(out), in, [a, row](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    if (tp.requires_grad(row)) tp.accumulate(row, g.colwise().sum());
  });
}

Var scale(const Var& a, double factor) {
  Tape& t = *a.tape();
  const Var in[] = {a};
  return t.record(a.value() * factor, in, [a, factor](Tape& tp, const Matrix& g) { tp.accumulate(a, g * factor); });
}

Var scale_by(const Var& a, const Var& s) {
  require_same_tape(a, s);
  require_shape(s.rows() == 1 && s.cols() == 1, "scale_by", a, s);
  Tape& t = *a.tape();
  const Var in[] = {a, s};
  return t.record(a.value() * s.value()(0, 0), in, [a, s](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, g * tp.value(s)(0, 0));
    if (tp.requires_grad(s)) tp.accumulate(s, Matrix::Constant(1, 1, g.cwiseProduct(tp.value(a)).sum()));
  });
}

Var add_constant(const Var& s, double c) {
  Tape& t = *s.tape();
  const Var in[] = {s};
  return t.record(s.value().array() + c, in, [s](Tape& tp, const Matrix& g) { tp.accumulate(s, g); });
}

Var spmm(const SparseOperator& op, const Var& x) {
  if (op.forward.cols() != x.rows())
    throw Error(ErrorCode::ShapeMismatch, "spmm: operator has " + std::to_string(op.forward.cols()) +
                                              " columns, input has " + std::to_string(x.rows()) + " rows");
  Tape& t = *x.tape();
  const Var in[] = {x};
  const SparseOperator* p = &op;
  return t.record(op.forward * x.value(), in, [p, x](Tape& tp, const Matrix& g) {
    tp.accumulate(x, p->transpose * g);
  });
}

Var relu(const Var& a) {
  Tape& t = *a.tape();
  t.note_kinks(a.value());
  const Var in[] = {a};
  return t.record(a.value().cwiseMax(0.0), in, [a](Tape& tp, const Matrix& g) {
    tp.accumulate(a, (tp.value(a).array() > 0.0).select(g, 0.0));
  });
}

Var leaky_relu(const Var& a, double slope) {
  Tape& t = *a.tape();
  t.note_kinks(a.value());
  const Var in[] = {a};
  Matrix out = (a.value().array() > 0.0).select(a.value(), slope * a.value());
  return t.record(std::move(out), in, [a, slope](Tape& tp, const Matrix& g) {
    tp.accumulate(a, (tp.value(a).array() > 0.0).select(g, slope * g));
  });
}

Var mul_constant(const Var& a, const Matrix& m) {
  if (m.rows() != a.rows() || m.cols() != a.cols()) throw Error(ErrorCode::ShapeMismatch, "mul_constant shape");
  Tape& t = *a.tape();
  const Var in[] = {a};
  return t.record(a.value().cwiseProduct(m), in, [a, m](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g.cwiseProduct(m));
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw Error(ErrorCode::InvalidArgument, "concat_cols of nothing");
  Tape& t = *parts.front().tape();
  const Index rows = parts.front().rows();
  Index cols = 0;
  for (const Var& p : parts) {
    require_same_tape(parts.front(), p);
    require_shape(p.rows() == rows, "concat_cols", parts.front(), p);
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<Index> offsets;
  Index at = 0;
  for (const Var& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    offsets.push_back(at);
    at += p.cols();
  }
  std::vector<Var> captured(parts.begin(), parts.end());
  return t.record(std::move(out), parts, [captured, offsets](Tape& tp, const Matrix& g) {
    for (std::size_t k = 0; k < captured.size(); ++k)
      if (tp.requires_grad(captured[k]))
        tp.accumulate(captured[k], g.middleCols(offsets[k], captured[k].cols()));
  });
}

Var mean_of(std::span<const Var> parts) {
  if (parts.empty()) throw Error(ErrorCode::InvalidArgument, "mean_of nothing");
  Tape& t = *parts.front().tape();
  Matrix out = parts.front().value();
  for (std::size_t k = 1; k < parts.size(); ++k) {
    require_same_tape(parts.front(), parts[k]);
    require_shape(parts[k].rows() == out.rows() && parts[k].cols() == out.cols(), "mean_of", parts.front(), parts[k]);
    out += parts[k].value();
  }
  const double inv = 1.0 / static_cast<double>(parts.size());
  out *= inv;
  std::vector<Var> captured(parts.begin(), parts.end());
  return t.record(std::move(out), parts, [captured, inv](Tape& tp, const Matrix& g) {
    for (const Var& v : captured) tp.accumulate(v, g * inv);
  });
}

Var gather_rows(const Var& a, std::span<const Index> index) {
  Tape& t = *a.tape();
  const Matrix& src = a.value();
  const Index n = static_cast<Index>(index.size());
  Matrix out(n, src.cols());
  for (Index c = 0; c < src.cols(); ++c) {
    const double* from = src.col(c).data();
    double* to = out.col(c).data();
    for (Index k = 0; k < n; ++k) to[k] = from[index[static_cast<std::size_t>(k)]];
  }
  const Var in[] = {a};
  return t.record(std::move(out), in, [a, index](Tape& tp, const Matrix& g) {
    Matrix ga = Matrix::Zero(tp.value(a).rows(), tp.value(a).cols());
    const Index n2 = static_cast<Index>(index.size());
    for (Index c = 0; c < ga.cols(); ++c) {
      const double* from = g.col(c).data();
      double* to = ga.col(c).data();
      for (Index k = 0; k < n2; ++k) to[index[static_cast<std::size_t>(k)]] += from[k];
    }
    tp.accumulate(a, std::move(ga));
  });
}

Var segment_softmax(const Var& scores, std::span<const Index> offsets) {
  if (scores.cols() != 1 || offsets.empty() || offsets.back() != scores.rows())
    throw Error(ErrorCode::ShapeMismatch, "segment_softmax: scores must be E x 1 matching offsets");
  Tape& t = *scores.tape();
  const Matrix& s = scores.value();
  Matrix out(s.rows(), 1);
  for (std::size_t seg = 0; seg + 1 < offsets.size(); ++seg) {
    const Index b = offsets[seg];
    const Index e = offsets[seg + 1];
    if (b == e) continue;
    const double mx = s.col(0).segment(b, e - b).maxCoeff();
    double z = 0.0;
    for (Index k = b; k < e; ++k) z += (out(k, 0) = std::exp(s(k, 0) - mx));
    for (Index k = b; k < e; ++k) out(k, 0) /= z;
  }
  const Var in[] = {scores};
  return t.record(std::move(out), in, [scores, offsets](Tape& tp, const Matrix& g) {
    // alpha is recomputed from the scores rather than captured
    const Matrix& s2 = tp.value(scores);
    Matrix gs(s2.rows(), 1);
    for (std::size_t seg = 0; seg + 1 < offsets.size(); ++seg) {
      const Index b = offsets[seg];
      const Index e = offsets[seg + 1];
      if (b == e) continue;
      const double mx = s2.col(0).segment(b, e - b).maxCoeff();
      double z = 0.0;
      for (Index k = b; k < e; ++k) z += std::exp(s2(k, 0) - mx);
      double dot = 0.0;
      for (Index k = b; k < e; ++k) dot += g(k, 0) * std::exp(s2(k, 0) - mx) / z;
      for (Index k = b; k < e; ++k) gs(k, 0) = std::exp(s2(k, 0) - mx) / z * (g(k, 0) - dot);
    }
    tp.accumulate(scores, gs);
  });
}

Var scatter_weighted_sum(const Var& weights, const Var& messages, std::span<const Index> target, Index rows) {
  require_same_tape(weights, messages);
  if (weights.cols() != 1 || weights.rows() != messages.rows() ||
      static_cast<std::size_t>(messages.rows()) != target.size())
    throw Error(ErrorCode::ShapeMismatch, "scatter_weighted_sum: edge counts disagree");
  Tape& t = *messages.tape();
  const Matrix& w = weights.value();
  const Matrix& m = messages.value();
  const Index edges = static_cast<Index>(target.size());
  Matrix out = Matrix::Zero(rows, m.cols());
  for (Index c = 0; c < m.cols(); ++c) {
    const double* from = m.col(c).data();
    double* to = out.col(c).data();
    for (Index e = 0; e < edges; ++e) to[target[static_cast<std::size_t>(e)]] += w(e, 0) * from[e];
  }
  const Var in[] = {weights, messages};
  return t.record(std::move(out), in, [weights, messages, target](Tape& tp, const Matrix& g) {
    const Matrix& w2 = tp.value(weights);
    const Matrix& m2 = tp.value(messages);
    const Index n = static_cast<Index>(target.size());
    if (tp.requires_grad(weights)) {
      Matrix gw = Matrix::Zero(w2.rows(), 1);
      for (Index c = 0; c < m2.cols(); ++c) {
        const double* gc = g.col(c).data();
        const double* mc = m2.col(c).data();
        for (Index e = 0; e < n; ++e) gw(e, 0) += gc[target[static_cast<std::size_t>(e)]] * mc[e];
      }
      tp.accumulate(weights, std::move(gw));
    }
    if (tp.requires_grad(messages)) {
      Matrix gm(m2.rows(), m2.cols());
      for (Index c = 0; c < m2.cols(); ++c) {
        const double* gc = g.col(c).data();
        double* to = gm.col(c).data();
        for (Index e = 0; e < n; ++e) to[e] = w2(e, 0) * gc[target[static_cast<std::size_t>(e)]];
      }
      tp.accumulate(messages, std::move(gm));
    }
  });
}

Var edge_scores(const Var& xs, const Var& xt, const Var& attention, std::span<const Index> source,
                std::span<const Index> target, double slope) {
  require_same_tape(xs, xt);
  require_same_tape(xs, attention);
  require_shape(xs.cols() == xt.cols() && xs.rows() == xt.rows(), "edge_scores", xs, xt);
  require_shape(attention.rows() == xs.cols() && attention.cols() == 1, "edge_scores", xs, attention);
  if (source.size() != target.size()) throw Error(ErrorCode::ShapeMismatch, "edge_scores: edge lists differ");
  Tape& t = *xs.tape();
  const Index edges = static_cast<Index>(source.size());
  const Index width = xs.cols();
  const Matrix& a = attention.value();
  Matrix out = Matrix::Zero(edges, 1);
  Matrix pre(edges, 1);
  for (Index f = 0; f < width; ++f) {
    const double* ps = xs.value().col(f).data();
    const double* pt = xt.value().col(f).data();
    const double af = a(f, 0);
    for (Index e = 0; e < edges; ++e) {
      const double z = ps[source[static_cast<std::size_t>(e)]] + pt[target[static_cast<std::size_t>(e)]];
      pre(e, 0) = z;
      out(e, 0) += af * (z > 0.0 ? z : slope * z);
    }
    t.note_kinks(pre);
  }
  const Var in[] = {xs, xt, attention};
  return t.record(std::move(out), in, [xs, xt, attention, source, target, slope](Tape& tp, const Matrix& g) {
    const Matrix& vs = tp.value(xs);
    const Matrix& vt = tp.value(xt);
    const Matrix& va = tp.value(attention);
    const bool need_s = tp.requires_grad(xs), need_t = tp.requires_grad(xt), need_a = tp.requires_grad(attention);
    Matrix gs = Matrix::Zero(vs.rows(), vs.cols());
    Matrix gt = Matrix::Zero(vt.rows(), vt.cols());
    Matrix ga = Matrix::Zero(va.rows(), 1);
    const Index n = static_cast<Index>(source.size());
    for (Index f = 0; f < vs.cols(); ++f) {
      const double* ps = vs.col(f).data();
      const double* pt = vt.col(f).data();
      double* qs = gs.col(f).data();
      double* qt = gt.col(f).data();
      const double af = va(f, 0);
      double acc = 0.0;
      for (Index e = 0; e < n; ++e) {
        const Index i = source[static_cast<std::size_t>(e)], j = target[static_cast<std::size_t>(e)];
        const double z = ps[i] + pt[j];
        const double ge = g(e, 0);
        acc += ge * (z > 0.0 ? z : slope * z);
        const double d = ge * af * (z > 0.0 ? 1.0 : slope);
        qs[i] += d;
        qt[j] += d;
      }
      ga(f, 0) = acc;
    }
    if (need_s) tp.accumulate(xs, std::move(gs));
    if (need_t) tp.accumulate(xt, std::move(gt));
    if (need_a) tp.accumulate(attention, std::move(ga));
  });
}

Var edge_aggregate(const Var& weights, const Var& x, std::span<const Index> source, std::span<const Index> target,
                   Index rows) {
  require_same_tape(weights, x);
  if (weights.cols() != 1 || static_cast<std::size_t>(weights.rows()) != target.size() ||
      source.size() != target.size())
    throw Error(ErrorCode::ShapeMismatch, "edge_aggregate: edge counts disagree");
  Tape& t = *x.tape();
  const Index edges = static_cast<Index>(target.size());
  const Matrix& w = weights.value();
  Matrix out = Matrix::Zero(rows, x.cols());
  for (Index c = 0; c < x.cols(); ++c) {
    const double* from = x.value().col(c).data();
    double* to = out.col(c).data();
    for (Index e = 0; e < edges; ++e)
      to[target[static_cast<std::size_t>(e)]] += w(e, 0) * from[source[static_cast<std::size_t>(e)]];
  }
  const Var in[] = {weights, x};
  return t.record(std::move(out), in, [weights, x, source, target](Tape& tp, const Matrix& g) {
    const Matrix& w2 = tp.value(weights);
    const Matrix& v = tp.value(x);
    const Index n = static_cast<Index>(target.size());
    if (tp.requires_grad(weights)) {
      Matrix gw = Matrix::Zero(w2.rows(), 1);
      for (Index c = 0; c < v.cols(); ++c) {
        const double* gc = g.col(c).data();
        const double* vc = v.col(c).data();
        for (Index e = 0; e < n; ++e)
          gw(e, 0) += gc[target[static_cast<std::size_t>(e)]] * vc[source[static_cast<std::size_t>(e)]];
      }
      tp.accumulate(weights, std::move(gw));
    }
    if (tp.requires_grad(x)) {
      Matrix gx = Matrix::Zero(v.rows(), v.cols());
      for (Index c = 0; c < v.cols(); ++c) {
        const double* gc = g.col(c).data();
        double* to = gx.col(c).data();
        for (Index e = 0; e < n; ++e)
          to[source[static_cast<std::size_t>(e)]] += w2(e, 0) * gc[target[static_cast<std::size_t>(e)]];
      }
      tp.accumulate(x, std::move(gx));
    }
  });
}

Var masked_mse(const Var& pred, const Vector& y, const Mask& mask) {
  if (pred.cols() != 1 || pred.rows() != y.size() || static_cast<std::size_t>(y.size()) != mask.size())
    throw Error(ErrorCode::ShapeMismatch, "masked_mse: prediction, target and mask lengths differ");
  const std::size_t m = count(mask);
  if (m == 0) throw Error(ErrorCode::EmptyMask, "loss mask selects no node");
  Tape& t = *pred.tape();
  const Matrix& p = pred.value();
  double sum = 0.0;
  for (Index i = 0; i < y.size(); ++i)
    if (mask[static_cast<std::size_t>(i)]) sum += (p(i, 0) - y(i)) * (p(i, 0) - y(i));
  const double inv = 1.0 / static_cast<double>(m);
  const Var in[] = {pred};
  return t.record(Matrix::Constant(1, 1, sum * inv), in, [pred, y, mask, inv](Tape& tp, const Matrix& g) {
    const Matrix& p2 = tp.value(pred);
    Matrix gp = Matrix::Zero(p2.rows(), 1);
    for (Index i = 0; i < y.size(); ++i)
      if (mask[static_cast<std::size_t>(i)]) gp(i, 0) = 2.0 * inv * (p2(i, 0) - y(i)) * g(0, 0);
    tp.accumulate(pred, gp);
  });
}

}  // namespace ops
}  // namespace geohealth::nn
