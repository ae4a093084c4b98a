#pragma once

#include <limits>
#include <string>
#include <vector>

#include "geohealth/nn/model.hpp"
#include "geohealth/nn/optim.hpp"

namespace geohealth::nn {

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = std::numeric_limits<double>::quiet_NaN();
};

struct TrainedModel {
  ModelSpec spec;
  Index input_dim = 0;
  ParameterStore parameters;
  std::vector<EpochRecord> training_log;
  std::uint64_t seed = 0;
  int best_epoch = 0;

  bool trained() const noexcept { return !training_log.empty(); }
};

/// Patience counter over validation losses; improvement means strictly lower.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  /// Records the loss of `epoch`; returns true when it is the new best.
  bool update(int epoch, double loss);
  bool should_stop() const noexcept { return since_best_ >= patience_; }
  int best_epoch() const noexcept { return best_epoch_; }
  double best_loss() const noexcept { return best_loss_; }

 private:
  int patience_;
  int since_best_ = 0;
  int best_epoch_ = 0;
  double best_loss_ = std::numeric_limits<double>::infinity();
};

/// Full-graph training. Loss over `train_mask`; after every step the
/// validation loss (eval mode) drives early stopping, and the best-validation
/// parameters are restored. With an empty `val_mask` all epochs run and the
/// final parameters are kept. Only labels under the two masks are read.
TrainedModel train(const ModelSpec& spec, const MessageGraph& graph, const Matrix& x, const Vector& y,
                   const Mask& train_mask, const Mask& val_mask, const TrainConfig& config);

struct Prediction {
  Vector values;
  Matrix embedding;  ///< N x hidden2
};

/// Eval-mode forward (dropout off).
Prediction forward(const TrainedModel& model, const MessageGraph& graph, const Matrix& x);

/// "epoch,train_loss,val_loss"
std::string training_log_csv(const TrainedModel& model);

}  // namespace geohealth::nn
