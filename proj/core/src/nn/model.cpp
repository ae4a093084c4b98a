#include "geohealth/nn/model.hpp"

#include <cmath>

#include "geohealth/error.hpp"
#include "geohealth/nn/layers.hpp"

namespace geohealth::nn {

std::string_view to_string(Architecture a) {
  switch (a) {
    case Architecture::gcn: return "gcn";
    case Architecture::gin: return "gin";
    case Architecture::graphsage: return "graphsage";
    case Architecture::gatv2: return "gatv2";
  }
  return "unknown";
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::linear: return "linear";
  }
  return "unknown";
}

Architecture architecture_from_string(std::string_view s) {
  for (Architecture a : kAllArchitectures)
    if (to_string(a) == s) return a;
  if (s == "sage") return Architecture::graphsage;
  if (s == "gat") return Architecture::gatv2;
  throw Error(ErrorCode::InvalidConfig, "unknown architecture '" + std::string(s) + "'");
}

Activation activation_from_string(std::string_view s) {
  for (Activation a : {Activation::relu, Activation::leaky_relu, Activation::linear})
    if (to_string(a) == s) return a;
  throw Error(ErrorCode::InvalidConfig, "unknown activation '" + std::string(s) + "'");
}

void ModelSpec::validate() const {
  if (depth < 1) throw Error(ErrorCode::InvalidConfig, "depth must be >= 1");
  if (hidden1 < 1 || hidden2 < 1) throw Error(ErrorCode::InvalidConfig, "hidden sizes must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error(ErrorCode::InvalidConfig, "dropout must lie in [0, 1)");
  if (gat_heads < 1) throw Error(ErrorCode::InvalidConfig, "gat_heads must be >= 1");
}

std::vector<int> layer_widths(const ModelSpec& spec) {
  std::vector<int> w(static_cast<std::size_t>(spec.depth), spec.hidden1);
  w.back() = spec.hidden2;
  return w;
}

// ---------------------------------------------------------------------------

Matrix& ParameterStore::add(std::string name, Matrix value) {
  if (contains(name)) throw Error(ErrorCode::InvalidArgument, "duplicate parameter '" + name + "'");
  entries_.emplace_back(std::move(name), std::move(value));
  return entries_.back().second;
}

Matrix& ParameterStore::at(std::string_view name) {
  for (auto& [n, m] : entries_)
    if (n == name) return m;
  throw Error(ErrorCode::InvalidArgument, "no parameter '" + std::string(name) + "'");
}

const Matrix& ParameterStore::at(std::string_view name) const {
  for (const auto& [n, m] : entries_)
    if (n == name) return m;
  throw Error(ErrorCode::InvalidArgument, "no parameter '" + std::string(name) + "'");
}

bool ParameterStore::contains(std::string_view name) const {
  for (const auto& e : entries_)
    if (e.first == name) return true;
  return false;
}

Index ParameterStore::scalar_count() const {
  Index total = 0;
  for (const auto& e : entries_) total += e.second.size();
  return total;
}

namespace {

Matrix glorot(Rng& rng, Index fan_in, Index fan_out) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix m(fan_in, fan_out);
  for (Index c = 0; c < fan_out; ++c)
    for (Index r = 0; r < fan_in; ++r) m(r, c) = rng.uniform(-limit, limit);
  return m;
}

std::string layer_prefix(std::size_t l) { return "mp" + std::to_string(l); }

}  // namespace

ParameterStore init_parameters(const ModelSpec& spec, Index input_dim, std::uint64_t seed) {
  spec.validate();
  if (input_dim < 1) throw Error(ErrorCode::InvalidConfig, "input dimension must be positive");
  Rng rng(seed);
  ParameterStore store;
  const std::vector<int> widths = layer_widths(spec);
  Index in = input_dim;
  for (std::size_t l = 0; l < widths.size(); ++l) {
    const Index out = widths[l];
    const bool last = l + 1 == widths.size();
    const std::string p = layer_prefix(l);
    switch (spec.architecture) {
      case Architecture::gcn:
        store.add(p + ".weight", glorot(rng, in, out));
        store.add(p + ".bias", Matrix::Zero(1, out));
        in = out;
        break;
      case Architecture::gin:
        store.add(p + ".eps", Matrix::Constant(1, 1, spec.gin_epsilon_init));
        store.add(p + ".mlp1.weight", glorot(rng, in, out));
        store.add(p + ".mlp1.bias", Matrix::Zero(1, out));
        store.add(p + ".mlp2.weight", glorot(rng, out, out));
        store.add(p + ".mlp2.bias", Matrix::Zero(1, out));
        in = out;
        break;
      case Architecture::graphsage:
        store.add(p + ".weight", glorot(rng, 2 * in, out));
        store.add(p + ".bias", Matrix::Zero(1, out));
        in = out;
        break;
      case Architecture::gatv2: {
        for (int h = 0; h < spec.gat_heads; ++h) {
          const std::string hp = p + ".head" + std::to_string(h);
          store.add(hp + ".weight_src", glorot(rng, in, out));
          store.add(hp + ".weight_dst", glorot(rng, in, out));
          store.add(hp + ".att", glorot(rng, out, 1));
        }
        const Index combined = last ? out : out * spec.gat_heads;
        store.add(p + ".bias", Matrix::Zero(1, combined));
        in = combined;
        break;
      }
    }
  }
  store.add("head.weight", glorot(rng, in, 1));
  store.add("head.bias", Matrix::Zero(1, 1));
  return store;
}

Var BoundParameters::operator[](std::string_view name) const {
  const auto& entries = store->entries();
  for (std::size_t k = 0; k < entries.size(); ++k)
    if (entries[k].first == name) return vars[k];
  throw Error(ErrorCode::InvalidArgument, "no parameter '" + std::string(name) + "'");
}

BoundParameters bind(Tape& tape, const ParameterStore& store, bool requires_grad) {
  BoundParameters b;
  b.store = &store;
  for (const auto& e : store.entries()) b.vars.push_back(tape.leaf(e.second, requires_grad));
  return b;
}

ForwardPass forward_on_tape(Tape& tape, const ModelSpec& spec, const BoundParameters& params,
                            const MessageGraph& graph, const Matrix& x, Rng* dropout_rng) {
  if (x.rows() != graph.nodes)
    throw Error(ErrorCode::ShapeMismatch, "feature rows " + std::to_string(x.rows()) + " != graph nodes " +
                                              std::to_string(graph.nodes));
  ForwardPass out;
  Var h = tape.leaf(x);
  const std::size_t depth = static_cast<std::size_t>(spec.depth);
  for (std::size_t l = 0; l < depth; ++l) {
    const std::string p = layer_prefix(l);
    const bool last = l + 1 == depth;
    Var z;
    switch (spec.architecture) {
      case Architecture::gcn:
        z = gcn_layer(graph, h, {params[p + ".weight"], params[p + ".bias"]});
        break;
      case Architecture::gin:
        z = gin_layer(graph, h,
                      {params[p + ".eps"], params[p + ".mlp1.weight"], params[p + ".mlp1.bias"],
                       params[p + ".mlp2.weight"], params[p + ".mlp2.bias"]});
        break;
      case Architecture::graphsage:
        z = sage_layer(graph, h, {params[p + ".weight"], params[p + ".bias"]});
        break;
      case Architecture::gatv2: {
        GatParams gp;
        for (int k = 0; k < spec.gat_heads; ++k) {
          const std::string hp = p + ".head" + std::to_string(k);
          gp.heads.push_back({params[hp + ".weight_src"], params[hp + ".weight_dst"], params[hp + ".att"]});
        }
        gp.bias = params[p + ".bias"];
        gp.concat = !last;
        GatOutput g = gatv2_layer(graph, h, gp, spec.leaky_slope);
        z = g.out;
        out.attention.push_back(std::move(g.attention));
        break;
      }
    }
    h = activate(z, spec.activation, spec.leaky_slope);
    if (!last && dropout_rng != nullptr && spec.dropout > 0.0) {
      const double keep = 1.0 - spec.dropout;
      Matrix mask(h.rows(), h.cols());
      for (Index c = 0; c < mask.cols(); ++c)
        for (Index r = 0; r < mask.rows(); ++r) mask(r, c) = dropout_rng->uniform() < keep ? 1.0 / keep : 0.0;
      h = ops::mul_constant(h, mask);
    }
  }
  out.embedding = h;
  out.prediction = ops::add_row(ops::matmul(h, params["head.weight"]), params["head.bias"]);
  return out;
}

LossAndGradients loss_and_gradients(const ModelSpec& spec, const ParameterStore& params, const MessageGraph& graph,
                                    const Matrix& x, const Vector& y, const Mask& mask, Rng* dropout_rng,
                                    bool track_kinks) {
  Tape tape;
  tape.track_kinks(track_kinks);
  BoundParameters bound = bind(tape, params, true);
  ForwardPass fp = forward_on_tape(tape, spec, bound, graph, x, dropout_rng);
  Var loss = ops::masked_mse(fp.prediction, y, mask);
  tape.backward(loss);
  LossAndGradients out;
  out.loss = loss.value()(0, 0);
  out.gradients.reserve(bound.vars.size());
  for (const Var& v : bound.vars) out.gradients.push_back(tape.grad(v));
  out.kink_pattern = tape.kink_pattern();
  return out;
}

std::pair<double, std::vector<std::uint8_t>> evaluate_loss(const ModelSpec& spec, const ParameterStore& params,
                                                           const MessageGraph& graph, const Matrix& x,
                                                           const Vector& y, const Mask& mask, bool track_kinks) {
  Tape tape;
  tape.track_kinks(track_kinks);
  BoundParameters bound = bind(tape, params, false);
  ForwardPass fp = forward_on_tape(tape, spec, bound, graph, x, nullptr);
  Var loss = ops::masked_mse(fp.prediction, y, mask);
  return {loss.value()(0, 0), tape.kink_pattern()};
}

}  // namespace geohealth::nn
