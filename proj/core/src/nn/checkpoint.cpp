#include "geohealth/nn/checkpoint.hpp"

#include <cmath>

#include "geohealth/csv.hpp"
#include "geohealth/error.hpp"

namespace geohealth::nn {

using nlohmann::json;

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("bad value for '") + key + "': " + e.what());
  }
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json spec_to_json(const ModelSpec& spec) {
  return {{"architecture", std::string(to_string(spec.architecture))},
          {"depth", spec.depth},
          {"hidden1", spec.hidden1},
          {"hidden2", spec.hidden2},
          {"dropout", spec.dropout},
          {"activation", std::string(to_string(spec.activation))},
          {"leaky_slope", spec.leaky_slope},
          {"gin_epsilon_init", spec.gin_epsilon_init},
          {"sage_aggregator", "mean"},
          {"gat_heads", spec.gat_heads}};
}

ModelSpec spec_from_json(const json& j, ModelSpec spec) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "model spec must be a JSON object");
  std::string name;
  if (j.contains("architecture")) {
    read_if(j, "architecture", name);
    spec.architecture = architecture_from_string(name);
  }
  if (j.contains("activation")) {
    read_if(j, "activation", name);
    spec.activation = activation_from_string(name);
  }
  if (j.contains("sage_aggregator")) {
    read_if(j, "sage_aggregator", name);
    if (name != "mean") throw Error(ErrorCode::InvalidConfig, "unsupported sage_aggregator '" + name + "'");
  }
  read_if(j, "depth", spec.depth);
  read_if(j, "hidden1", spec.hidden1);
  read_if(j, "hidden2", spec.hidden2);
  read_if(j, "dropout", spec.dropout);
  read_if(j, "leaky_slope", spec.leaky_slope);
  read_if(j, "gin_epsilon_init", spec.gin_epsilon_init);
  read_if(j, "gat_heads", spec.gat_heads);
  spec.validate();
  return spec;
}

json train_config_to_json(const TrainConfig& c) {
  return {{"lr", c.lr},
          {"weight_decay", c.weight_decay},
          {"optimizer", std::string(to_string(c.optimizer))},
          {"epochs", c.epochs},
          {"patience", c.patience},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "training config must be a JSON object");
  read_if(j, "lr", c.lr);
  read_if(j, "weight_decay", c.weight_decay);
  if (j.contains("optimizer")) {
    std::string name;
    read_if(j, "optimizer", name);
    c.optimizer = optimizer_from_string(name);
  }
  read_if(j, "epochs", c.epochs);
  read_if(j, "patience", c.patience);
  read_if(j, "seed", c.seed);
  c.validate();
  return c;
}

json model_to_json(const TrainedModel& model) {
  json params = json::array();
  for (const auto& [name, m] : model.parameters.entries()) {
    json data = json::array();
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    params.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}});
  }
  json log = json::array();
  for (const auto& r : model.training_log)
    log.push_back({{"epoch", r.epoch}, {"train_loss", number_or_null(r.train_loss)},
                   {"val_loss", number_or_null(r.val_loss)}});
  return {{"format", "geohealth-model"},
          {"version", 1},
          {"spec", spec_to_json(model.spec)},
          {"input_dim", model.input_dim},
          {"seed", model.seed},
          {"best_epoch", model.best_epoch},
          {"parameters", std::move(params)},
          {"training_log", std::move(log)}};
}

TrainedModel model_from_json(const json& j) {
  try {
    if (j.value("format", "") != "geohealth-model")
      throw Error(ErrorCode::ParseError, "not a model checkpoint");
    TrainedModel model;
    model.spec = spec_from_json(j.at("spec"));
    model.input_dim = j.at("input_dim").get<Index>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.best_epoch = j.at("best_epoch").get<int>();
    for (const auto& p : j.at("parameters")) {
      const Index rows = p.at("rows").get<Index>();
      const Index cols = p.at("cols").get<Index>();
      const auto& data = p.at("data");
      if (static_cast<Index>(data.size()) != rows * cols)
        throw Error(ErrorCode::ParseError, "parameter '" + p.at("name").get<std::string>() + "' has wrong size");
      Matrix m(rows, cols);
      for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)].get<double>();
      model.parameters.add(p.at("name").get<std::string>(), std::move(m));
    }
    const ParameterStore reference = init_parameters(model.spec, model.input_dim, 0);
    if (reference.size() != model.parameters.size())
      throw Error(ErrorCode::ParseError, "checkpoint parameters do not match its model spec");
    for (std::size_t k = 0; k < reference.size(); ++k) {
      const auto& [rn, rm] = reference.entries()[k];
      const auto& [pn, pm] = model.parameters.entries()[k];
      if (rn != pn || rm.rows() != pm.rows() || rm.cols() != pm.cols())
        throw Error(ErrorCode::ParseError, "checkpoint parameter '" + pn + "' does not match its model spec");
    }
    for (const auto& r : j.at("training_log")) {
      EpochRecord rec;
      rec.epoch = r.at("epoch").get<int>();
      rec.train_loss = r.at("train_loss").is_null() ? std::nan("") : r.at("train_loss").get<double>();
      rec.val_loss = r.at("val_loss").is_null() ? std::nan("") : r.at("val_loss").get<double>();
      model.training_log.push_back(rec);
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed checkpoint: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  csv::write_text_atomic(path, model_to_json(model).dump(1) + "\n");
}

TrainedModel load_model(const std::filesystem::path& path) {
  const std::string text = csv::read_text(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::ParseError, "invalid JSON in " + path.string());
  return model_from_json(j);
}

}  // namespace geohealth::nn
