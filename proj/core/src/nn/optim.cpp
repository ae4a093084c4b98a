#include "geohealth/nn/optim.hpp"

#include <cmath>

#include "geohealth/error.hpp"

namespace geohealth::nn {

std::string_view to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::adam: return "adam";
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::rmsprop: return "rmsprop";
  }
  return "unknown";
}

OptimizerKind optimizer_from_string(std::string_view s) {
  for (OptimizerKind k : {OptimizerKind::adam, OptimizerKind::sgd, OptimizerKind::rmsprop})
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::InvalidConfig, "unknown optimizer '" + std::string(s) + "'");
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw Error(ErrorCode::InvalidConfig, "lr must be positive");
  if (weight_decay < 0.0) throw Error(ErrorCode::InvalidConfig, "weight_decay must be non-negative");
  if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
  if (patience < 1) throw Error(ErrorCode::InvalidConfig, "patience must be >= 1");
}

void optimizer_step(OptimizerState& state, ParameterStore& params, const std::vector<Matrix>& grads,
                    const TrainConfig& config) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kRmsDecay = 0.99;
  constexpr double kEps = 1e-8;

  auto& entries = params.entries();
  if (grads.size() != entries.size())
    throw Error(ErrorCode::ShapeMismatch, "optimizer: " + std::to_string(grads.size()) + " gradients for " +
                                              std::to_string(entries.size()) + " parameters");
  if (state.first_moment.empty()) {
    for (const auto& e : entries) {
      state.first_moment.push_back(Matrix::Zero(e.second.rows(), e.second.cols()));
      state.second_moment.push_back(Matrix::Zero(e.second.rows(), e.second.cols()));
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    Matrix& theta = entries[k].second;
    if (grads[k].rows() != theta.rows() || grads[k].cols() != theta.cols())
      throw Error(ErrorCode::ShapeMismatch, "gradient shape differs for '" + entries[k].first + "'");
    const Matrix g = config.weight_decay != 0.0 ? Matrix(grads[k] + config.weight_decay * theta) : grads[k];
    switch (config.optimizer) {
      case OptimizerKind::sgd:
        theta -= config.lr * g;
        break;
      case OptimizerKind::rmsprop: {
        Matrix& v = state.second_moment[k];
        v = kRmsDecay * v + (1.0 - kRmsDecay) * g.cwiseProduct(g);
        theta.array() -= config.lr * g.array() / (v.array().sqrt() + kEps);
        break;
      }
      case OptimizerKind::adam: {
        Matrix& m = state.first_moment[k];
        Matrix& v = state.second_moment[k];
        m = kBeta1 * m + (1.0 - kBeta1) * g;
        v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
        const double c1 = 1.0 - std::pow(kBeta1, t);
        const double c2 = 1.0 - std::pow(kBeta2, t);
        theta.array() -= config.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
        break;
      }
    }
  }
}

}  // namespace geohealth::nn
