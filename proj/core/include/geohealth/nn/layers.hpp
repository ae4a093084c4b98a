#pragma once

#include <vector>

#include "geohealth/nn/message_graph.hpp"
#include "geohealth/nn/model.hpp"
#include "geohealth/nn/tape.hpp"

namespace geohealth::nn {

// Tape-level layers return pre-activation outputs; the model applies the
// activation between layers.

struct GcnParams {
  Var weight;  ///< in x out
  Var bias;    ///< 1 x out, optional
};
/// Â H W + b
Var gcn_layer(const MessageGraph& graph, const Var& h, const GcnParams& p);

struct GinParams {
  Var epsilon;  ///< 1 x 1
  Var weight1, bias1, weight2, bias2;
};
/// MLP((1 + eps) h_i + sum_{j in N(i)} h_j), MLP = Linear -> ReLU -> Linear
Var gin_layer(const MessageGraph& graph, const Var& h, const GinParams& p);

struct SageParams {
  Var weight;  ///< 2*in x out, acting on [h_i | mean_j h_j]
  Var bias;
};
Var sage_layer(const MessageGraph& graph, const Var& h, const SageParams& p);

struct GatHeadParams {
  Var weight_source;  ///< in x out, message and key of the neighbour
  Var weight_target;  ///< in x out, query of the receiving node
  Var attention;      ///< out x 1
};
struct GatParams {
  std::vector<GatHeadParams> heads;
  Var bias;
  bool concat = true;  ///< concatenate heads; average them when false
};
struct GatOutput {
  Var out;
  std::vector<Var> attention;  ///< per head, E x 1
};
/// e_ij = a^T LeakyReLU(W_t h_i + W_s h_j) over j in N(i) ∪ {i};
/// alpha = softmax_j(e_ij); out_i = sum_j alpha_ij W_s h_j.
GatOutput gatv2_layer(const MessageGraph& graph, const Var& h, const GatParams& p, double leaky_slope);

Var activate(const Var& h, Activation act, double leaky_slope);

// Value-level conveniences over a throwaway tape.

Matrix gcn_forward(const MessageGraph& graph, const Matrix& h, const Matrix& weight, Activation act);

struct GinMlp {
  Matrix weight1, bias1, weight2, bias2;
};
Matrix gin_forward(const MessageGraph& graph, const Matrix& h, double epsilon, const GinMlp& mlp);
/// Just the aggregation z = (1 + eps) h + A h.
Matrix gin_aggregate(const MessageGraph& graph, const Matrix& h, double epsilon);

Matrix sage_forward(const MessageGraph& graph, const Matrix& h, const Matrix& weight, Activation act);

struct GatForward {
  Matrix out;
  Vector attention;  ///< edge order of MessageGraph
};
GatForward gatv2_forward(const MessageGraph& graph, const Matrix& h, const Matrix& weight_source,
                         const Matrix& weight_target, const Matrix& attention, double leaky_slope, Activation act);

}  // namespace geohealth::nn
