#pragma once

#include <string_view>
#include <vector>

#include "geohealth/nn/model.hpp"

namespace geohealth::nn {

enum class OptimizerKind { adam, sgd, rmsprop };

std::string_view to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(std::string_view s);

struct TrainConfig {
  double lr = 0.001;
  double weight_decay = 5e-4;
  OptimizerKind optimizer = OptimizerKind::adam;
  int epochs = 300;
  int patience = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Adam: beta1 0.9, beta2 0.999, eps 1e-8, bias-corrected.
/// RMSprop: decay 0.99, eps 1e-8. SGD: plain step.
/// Weight decay is L2: g' = g + wd * theta, applied before the update.
struct OptimizerState {
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  long step = 0;
};

void optimizer_step(OptimizerState& state, ParameterStore& params, const std::vector<Matrix>& grads,
                    const TrainConfig& config);

}  // namespace geohealth::nn
