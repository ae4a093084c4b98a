#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geohealth/nn/message_graph.hpp"
#include "geohealth/nn/tape.hpp"
#include "geohealth/rng.hpp"

namespace geohealth::nn {

enum class Architecture { gcn, gin, graphsage, gatv2 };
enum class Activation { relu, leaky_relu, linear };
enum class SageAggregator { mean };

std::string_view to_string(Architecture a);
std::string_view to_string(Activation a);
Architecture architecture_from_string(std::string_view s);
Activation activation_from_string(std::string_view s);

inline constexpr Architecture kAllArchitectures[] = {Architecture::gcn, Architecture::gin, Architecture::graphsage,
                                                     Architecture::gatv2};

struct ModelSpec {
  Architecture architecture = Architecture::gatv2;
  int depth = 2;
  int hidden1 = 128;
  int hidden2 = 64;
  double dropout = 0.1;
  Activation activation = Activation::relu;
  double leaky_slope = 0.2;
  double gin_epsilon_init = 0.0;
  SageAggregator sage_aggregator = SageAggregator::mean;
  int gat_heads = 1;

  /// Throws InvalidConfig on depth < 1, dropout outside [0, 1), non-positive widths.
  void validate() const;
};

/// Output width of each message-passing layer: hidden1 for all but the last,
/// hidden2 for the last, so the embedding is always hidden2 wide.
std::vector<int> layer_widths(const ModelSpec& spec);

/// Named parameter arrays in creation order.
class ParameterStore {
 public:
  Matrix& add(std::string name, Matrix value);
  Matrix& at(std::string_view name);
  const Matrix& at(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::size_t size() const noexcept { return entries_.size(); }
  Index scalar_count() const;
  std::vector<std::pair<std::string, Matrix>>& entries() noexcept { return entries_; }
  const std::vector<std::pair<std::string, Matrix>>& entries() const noexcept { return entries_; }

 private:
  std::vector<std::pair<std::string, Matrix>> entries_;
};

/// Glorot-uniform weights, zero biases, GIN epsilon at its configured start.
ParameterStore init_parameters(const ModelSpec& spec, Index input_dim, std::uint64_t seed);

/// Parameters bound as tape leaves, aligned with the store order.
struct BoundParameters {
  std::vector<Var> vars;
  const ParameterStore* store = nullptr;
  Var operator[](std::string_view name) const;
};

BoundParameters bind(Tape& tape, const ParameterStore& store, bool requires_grad);

struct ForwardPass {
  Var prediction;  ///< N x 1
  Var embedding;   ///< N x hidden2, input of the head
  /// GATv2 attention per layer and head (E x 1, edge order of MessageGraph).
  std::vector<std::vector<Var>> attention;
};

/// Full forward on a tape. Dropout is active iff `dropout_rng` is non-null.
ForwardPass forward_on_tape(Tape& tape, const ModelSpec& spec, const BoundParameters& params,
                            const MessageGraph& graph, const Matrix& x, Rng* dropout_rng);

struct LossAndGradients {
  double loss = 0.0;
  std::vector<Matrix> gradients;  ///< aligned with the store order
  std::vector<std::uint8_t> kink_pattern;
};

/// Masked MSE and exact gradients for every parameter.
LossAndGradients loss_and_gradients(const ModelSpec& spec, const ParameterStore& params, const MessageGraph& graph,
                                    const Matrix& x, const Vector& y, const Mask& mask, Rng* dropout_rng = nullptr,
                                    bool track_kinks = true);

/// Masked MSE without gradients; returns the activation kink pattern too.
std::pair<double, std::vector<std::uint8_t>> evaluate_loss(const ModelSpec& spec, const ParameterStore& params,
                                                           const MessageGraph& graph, const Matrix& x,
                                                           const Vector& y, const Mask& mask,
                                                           bool track_kinks = true);

}  // namespace geohealth::nn
