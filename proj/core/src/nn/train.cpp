#include "geohealth/nn/train.hpp"

#include <cmath>

#include "geohealth/csv.hpp"
#include "geohealth/error.hpp"

namespace geohealth::nn {

bool EarlyStopping::update(int epoch, double loss) {
  if (loss < best_loss_) {
    best_loss_ = loss;
    best_epoch_ = epoch;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

TrainedModel train(const ModelSpec& spec, const MessageGraph& graph, const Matrix& x, const Vector& y,
                   const Mask& train_mask, const Mask& val_mask, const TrainConfig& config) {
  spec.validate();
  config.validate();
  const auto n = static_cast<std::size_t>(graph.nodes);
  if (x.rows() != graph.nodes || static_cast<std::size_t>(y.size()) != n || train_mask.size() != n ||
      (!val_mask.empty() && val_mask.size() != n))
    throw Error(ErrorCode::ShapeMismatch, "train: features, targets and masks must match the graph size");
  if (!x.allFinite()) throw Error(ErrorCode::InvalidArgument, "train: non-finite feature values");
  if (count(train_mask) == 0) throw Error(ErrorCode::EmptyTrainMask, "train mask selects no node");
  const bool validate = !val_mask.empty() && count(val_mask) > 0;
  if (validate)
    for (std::size_t i = 0; i < n; ++i)
      if (train_mask[i] && val_mask[i])
        throw Error(ErrorCode::InvalidArgument, "train and validation masks overlap at node " + std::to_string(i));

  TrainedModel model;
  model.spec = spec;
  model.input_dim = x.cols();
  model.seed = config.seed;
  model.parameters = init_parameters(spec, x.cols(), derive_seed(config.seed, 0));

  Rng dropout_rng(derive_seed(config.seed, 1));
  OptimizerState state;
  EarlyStopping stopper(config.patience);
  ParameterStore best = model.parameters;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    LossAndGradients step = loss_and_gradients(spec, model.parameters, graph, x, y, train_mask, &dropout_rng, false);
    if (!std::isfinite(step.loss))
      throw Error(ErrorCode::NonFiniteLoss, "training loss is not finite at epoch " + std::to_string(epoch) +
                                                " (diverged, or a label outside the masks entered the loss)");
    optimizer_step(state, model.parameters, step.gradients, config);

    EpochRecord rec{epoch, step.loss, std::numeric_limits<double>::quiet_NaN()};
    if (validate) {
      rec.val_loss = evaluate_loss(spec, model.parameters, graph, x, y, val_mask, false).first;
      if (!std::isfinite(rec.val_loss))
        throw Error(ErrorCode::NonFiniteLoss, "validation loss is not finite at epoch " + std::to_string(epoch));
    }
    model.training_log.push_back(rec);
    if (validate) {
      if (stopper.update(epoch, rec.val_loss)) best = model.parameters;
      if (stopper.should_stop()) break;
    }
  }
  if (validate) {
    model.parameters = std::move(best);
    model.best_epoch = stopper.best_epoch();
  } else {
    model.best_epoch = static_cast<int>(model.training_log.size());
  }
  return model;
}

Prediction forward(const TrainedModel& model, const MessageGraph& graph, const Matrix& x) {
  if (x.cols() != model.input_dim)
    throw Error(ErrorCode::ShapeMismatch, "model expects " + std::to_string(model.input_dim) + " input columns, got " +
                                              std::to_string(x.cols()));
  Tape tape;
  BoundParameters bound = bind(tape, model.parameters, false);
  ForwardPass fp = forward_on_tape(tape, model.spec, bound, graph, x, nullptr);
  return {fp.prediction.value().col(0), fp.embedding.value()};
}

std::string training_log_csv(const TrainedModel& model) {
  csv::Writer w({"epoch", "train_loss", "val_loss"});
  for (const auto& r : model.training_log)
    w.row({std::to_string(r.epoch), csv::format_number(r.train_loss), csv::format_number(r.val_loss)});
  return w.str();
}

}  // namespace geohealth::nn
