#include "geohealth/nn/layers.hpp"

#include "geohealth/error.hpp"

namespace geohealth::nn {

namespace {

Var affine(const Var& x, const Var& weight, const Var& bias) {
  Var out = ops::matmul(x, weight);
  if (bias.valid()) out = ops::add_row(out, bias);
  return out;
}

void require_rows(const MessageGraph& graph, const Var& h) {
  if (h.rows() != graph.nodes)
    throw Error(ErrorCode::ShapeMismatch, "layer input has " + std::to_string(h.rows()) + " rows, graph has " +
                                              std::to_string(graph.nodes) + " nodes");
}

}  // namespace

Var gcn_layer(const MessageGraph& graph, const Var& h, const GcnParams& p) {
  require_rows(graph, h);
  // multiply by W first when it narrows the width
  Var propagated = p.weight.cols() < h.cols() ? ops::spmm(graph.normalized, ops::matmul(h, p.weight))
                                              : ops::matmul(ops::spmm(graph.normalized, h), p.weight);
  return p.bias.valid() ? ops::add_row(propagated, p.bias) : propagated;
}

Var gin_layer(const MessageGraph& graph, const Var& h, const GinParams& p) {
  require_rows(graph, h);
  Var self = ops::scale_by(h, ops::add_constant(p.epsilon, 1.0));
  Var z = ops::add(self, ops::spmm(graph.adjacency, h));
  Var hidden = ops::relu(affine(z, p.weight1, p.bias1));
  return affine(hidden, p.weight2, p.bias2);
}

Var sage_layer(const MessageGraph& graph, const Var& h, const SageParams& p) {
  require_rows(graph, h);
  const Var parts[] = {h, ops::spmm(graph.mean, h)};
  return affine(ops::concat_cols(parts), p.weight, p.bias);
}

GatOutput gatv2_layer(const MessageGraph& graph, const Var& h, const GatParams& p, double leaky_slope) {
  require_rows(graph, h);
  if (p.heads.empty()) throw Error(ErrorCode::InvalidConfig, "GATv2 layer needs at least one head");
  GatOutput out;
  std::vector<Var> head_outputs;
  for (const GatHeadParams& head : p.heads) {
    Var xs = ops::matmul(h, head.weight_source);
    Var xt = ops::matmul(h, head.weight_target);
    Var scores = ops::edge_scores(xs, xt, head.attention, graph.edge_source, graph.edge_target, leaky_slope);
    Var alpha = ops::segment_softmax(scores, graph.offsets);
    head_outputs.push_back(ops::edge_aggregate(alpha, xs, graph.edge_source, graph.edge_target, graph.nodes));
    out.attention.push_back(alpha);
  }
  Var combined = head_outputs.size() == 1 ? head_outputs.front()
                 : p.concat               ? ops::concat_cols(head_outputs)
                                          : ops::mean_of(head_outputs);
  out.out = p.bias.valid() ? ops::add_row(combined, p.bias) : combined;
  return out;
}

Var activate(const Var& h, Activation act, double leaky_slope) {
  switch (act) {
    case Activation::relu: return ops::relu(h);
    case Activation::leaky_relu: return ops::leaky_relu(h, leaky_slope);
    case Activation::linear: return h;
  }
  return h;
}

Matrix gcn_forward(const MessageGraph& graph, const Matrix& h, const Matrix& weight, Activation act) {
  Tape tape;
  GcnParams p{tape.leaf(weight), {}};
  return activate(gcn_layer(graph, tape.leaf(h), p), act, 0.2).value();
}

Matrix gin_aggregate(const MessageGraph& graph, const Matrix& h, double epsilon) {
  if (h.rows() != graph.nodes) throw Error(ErrorCode::ShapeMismatch, "gin_aggregate: row mismatch");
  return (1.0 + epsilon) * h + graph.adjacency.forward * h;
}

Matrix gin_forward(const MessageGraph& graph, const Matrix& h, double epsilon, const GinMlp& mlp) {
  Tape tape;
  GinParams p{tape.leaf(Matrix::Constant(1, 1, epsilon)), tape.leaf(mlp.weight1), tape.leaf(mlp.bias1),
              tape.leaf(mlp.weight2), tape.leaf(mlp.bias2)};
  return gin_layer(graph, tape.leaf(h), p).value();
}

Matrix sage_forward(const MessageGraph& graph, const Matrix& h, const Matrix& weight, Activation act) {
  Tape tape;
  SageParams p{tape.leaf(weight), {}};
  return activate(sage_layer(graph, tape.leaf(h), p), act, 0.2).value();
}

GatForward gatv2_forward(const MessageGraph& graph, const Matrix& h, const Matrix& weight_source,
                         const Matrix& weight_target, const Matrix& attention, double leaky_slope, Activation act) {
  Tape tape;
  GatParams p;
  p.heads.push_back({tape.leaf(weight_source), tape.leaf(weight_target), tape.leaf(attention)});
  GatOutput o = gatv2_layer(graph, tape.leaf(h), p, leaky_slope);
  GatForward out;
  out.out = activate(o.out, act, leaky_slope).value();
  out.attention = o.attention.front().value().col(0);
  return out;
}

}  // namespace geohealth::nn
