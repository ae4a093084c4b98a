#include "geohealth/spatial_cv/search.hpp"

#include <cmath>

#include "geohealth/error.hpp"
#include "geohealth/nn/train.hpp"
#include "geohealth/parallel.hpp"
#include "geohealth/rng.hpp"
#include "geohealth/spatial_cv/metrics.hpp"

namespace geohealth::cv {

using nlohmann::json;

void SearchSpace::validate() const {
  if (lr.empty() || weight_decay.empty() || hidden1.empty() || hidden2.empty() || dropout.empty() ||
      epochs.empty() || optimizer.empty() || patience.empty())
    throw Error(ErrorCode::InvalidConfig, "every search-space axis needs at least one value");
}

nn::ModelSpec apply(const TrialConfig& t, nn::ModelSpec spec) {
  spec.hidden1 = t.hidden1;
  spec.hidden2 = t.hidden2;
  spec.dropout = t.dropout;
  return spec;
}

nn::TrainConfig apply(const TrialConfig& t, nn::TrainConfig c) {
  c.lr = t.lr;
  c.weight_decay = t.weight_decay;
  c.epochs = t.epochs;
  c.optimizer = t.optimizer;
  c.patience = t.patience;
  return c;
}

TrialConfig trial_from(const nn::ModelSpec& spec, const nn::TrainConfig& c) {
  return {c.lr, c.weight_decay, spec.hidden1, spec.hidden2, spec.dropout, c.epochs, c.optimizer, c.patience};
}

json trial_to_json(const TrialConfig& t) {
  return {{"lr", t.lr},
          {"weight_decay", t.weight_decay},
          {"hidden1", t.hidden1},
          {"hidden2", t.hidden2},
          {"dropout", t.dropout},
          {"epochs", t.epochs},
          {"optimizer", std::string(nn::to_string(t.optimizer))},
          {"patience", t.patience}};
}

json search_space_to_json(const SearchSpace& s) {
  json opt = json::array();
  for (auto o : s.optimizer) opt.push_back(std::string(nn::to_string(o)));
  return {{"lr", s.lr},           {"weight_decay", s.weight_decay}, {"hidden1", s.hidden1},
          {"hidden2", s.hidden2}, {"dropout", s.dropout},           {"epochs", s.epochs},
          {"optimizer", opt},     {"patience", s.patience}};
}

SearchSpace search_space_from_json(const json& j) {
  SearchSpace s;
  try {
    if (j.contains("lr")) s.lr = j.at("lr").get<std::vector<double>>();
    if (j.contains("weight_decay")) s.weight_decay = j.at("weight_decay").get<std::vector<double>>();
    if (j.contains("hidden1")) s.hidden1 = j.at("hidden1").get<std::vector<int>>();
    if (j.contains("hidden2")) s.hidden2 = j.at("hidden2").get<std::vector<int>>();
    if (j.contains("dropout")) s.dropout = j.at("dropout").get<std::vector<double>>();
    if (j.contains("epochs")) s.epochs = j.at("epochs").get<std::vector<int>>();
    if (j.contains("patience")) s.patience = j.at("patience").get<std::vector<int>>();
    if (j.contains("optimizer")) {
      s.optimizer.clear();
      for (const auto& o : j.at("optimizer")) s.optimizer.push_back(nn::optimizer_from_string(o.get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("bad search space: ") + e.what());
  }
  s.validate();
  return s;
}

std::vector<TrialConfig> sample_trials(const SearchSpace& space, int rounds, std::uint64_t seed) {
  space.validate();
  if (rounds < 1) throw Error(ErrorCode::InvalidConfig, "search needs at least one round");
  Rng rng(seed);
  auto pick = [&rng](const auto& axis) { return axis[static_cast<std::size_t>(rng.below(axis.size()))]; };
  std::vector<TrialConfig> out;
  out.reserve(static_cast<std::size_t>(rounds));
  for (int r = 0; r < rounds; ++r) {
    TrialConfig t;
    t.lr = pick(space.lr);
    t.weight_decay = pick(space.weight_decay);
    t.hidden1 = pick(space.hidden1);
    t.hidden2 = pick(space.hidden2);
    t.dropout = pick(space.dropout);
    t.epochs = pick(space.epochs);
    t.optimizer = pick(space.optimizer);
    t.patience = pick(space.patience);
    out.push_back(t);
  }
  return out;
}

SearchResult random_search(const SearchSpace& space, int rounds, std::uint64_t seed, const Objective& objective,
                           int jobs) {
  const std::vector<TrialConfig> configs = sample_trials(space, rounds, seed);
  SearchResult result;
  result.trials.resize(configs.size());
  parallel_for(configs.size(), jobs, [&](std::size_t i) {
    result.trials[i] = {static_cast<int>(i), configs[i], objective(configs[i], static_cast<int>(i))};
  });
  int best = -1;
  for (const Trial& t : result.trials) {
    if (std::isnan(t.objective)) continue;
    if (best < 0 || t.objective > result.trials[static_cast<std::size_t>(best)].objective) best = t.index;
  }
  result.best_index = best < 0 ? 0 : best;
  result.best = result.trials[static_cast<std::size_t>(result.best_index)].config;
  return result;
}

std::pair<Mask, Mask> split_train_val(const Mask& eligible, double val_fraction, std::uint64_t seed) {
  NodeSet nodes = nodes_from(eligible);
  Rng rng(seed);
  rng.shuffle(nodes);
  const auto n_val = static_cast<std::size_t>(std::lround(val_fraction * static_cast<double>(nodes.size())));
  Mask train(eligible.size(), false), val(eligible.size(), false);
  for (std::size_t k = 0; k < nodes.size(); ++k) (k < n_val ? val : train)[static_cast<std::size_t>(nodes[k])] = true;
  return {train, val};
}

double inner_validation_objective(const nn::ModelSpec& spec, const nn::TrainConfig& config,
                                  const nn::MessageGraph& graph, const Matrix& x, const Vector& y,
                                  const Mask& eligible, std::uint64_t seed, int resamples, double val_fraction) {
  if (resamples < 1) throw Error(ErrorCode::InvalidConfig, "resamples must be >= 1");
  double total = 0.0;
  for (int r = 0; r < resamples; ++r) {
    const std::uint64_t split_seed = derive_seed(seed, static_cast<std::uint64_t>(r));
    auto [train_mask, val_mask] = split_train_val(eligible, val_fraction, split_seed);
    if (count(val_mask) == 0) throw Error(ErrorCode::EmptyMask, "inner validation split is empty");
    nn::TrainConfig c = config;
    c.seed = derive_seed(split_seed, 7);
    const nn::TrainedModel model = nn::train(spec, graph, x, y, train_mask, val_mask, c);
    const nn::Prediction pred = nn::forward(model, graph, x);
    total += compute_metrics(pred.values, y, val_mask).r2;
  }
  return total / resamples;
}

}  // namespace geohealth::cv
