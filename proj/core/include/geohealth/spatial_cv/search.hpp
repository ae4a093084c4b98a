#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <nlohmann/json.hpp>

#include "geohealth/nn/message_graph.hpp"
#include "geohealth/nn/model.hpp"
#include "geohealth/nn/optim.hpp"

namespace geohealth::cv {

struct SearchSpace {
  std::vector<double> lr{0.001, 0.005, 0.01};
  std::vector<double> weight_decay{1e-4, 5e-4, 1e-3};
  std::vector<int> hidden1{64, 128, 256};
  std::vector<int> hidden2{16, 32, 64};
  std::vector<double> dropout{0.1, 0.3, 0.5};
  std::vector<int> epochs{200, 300};
  std::vector<nn::OptimizerKind> optimizer{nn::OptimizerKind::adam, nn::OptimizerKind::sgd,
                                           nn::OptimizerKind::rmsprop};
  std::vector<int> patience{10, 20};

  /// Throws InvalidConfig if any axis is empty.
  void validate() const;
};

struct TrialConfig {
  double lr = 0.001;
  double weight_decay = 5e-4;
  int hidden1 = 128;
  int hidden2 = 64;
  double dropout = 0.1;
  int epochs = 300;
  nn::OptimizerKind optimizer = nn::OptimizerKind::adam;
  int patience = 20;

  friend bool operator==(const TrialConfig&, const TrialConfig&) = default;
};

nn::ModelSpec apply(const TrialConfig& trial, nn::ModelSpec spec);
nn::TrainConfig apply(const TrialConfig& trial, nn::TrainConfig config);
TrialConfig trial_from(const nn::ModelSpec& spec, const nn::TrainConfig& config);

nlohmann::json trial_to_json(const TrialConfig& t);
nlohmann::json search_space_to_json(const SearchSpace& s);
SearchSpace search_space_from_json(const nlohmann::json& j);

struct Trial {
  int index = 0;
  TrialConfig config;
  double objective = 0.0;
};

struct SearchResult {
  int best_index = 0;
  TrialConfig best;
  std::vector<Trial> trials;
};

/// `rounds` uniform draws with replacement; depends only on (space, rounds, seed).
std::vector<TrialConfig> sample_trials(const SearchSpace& space, int rounds, std::uint64_t seed);

using Objective = std::function<double(const TrialConfig&, int trial_index)>;

/// Maximises `objective`; ties go to the earlier trial and NaN ranks last.
SearchResult random_search(const SearchSpace& space, int rounds, std::uint64_t seed, const Objective& objective,
                           int jobs = 1);

/// Mean validation R2 over `resamples` seeded 80:20 splits of `eligible`.
/// Each split trains with early stopping on its 20% and scores that 20%.
double inner_validation_objective(const nn::ModelSpec& spec, const nn::TrainConfig& config,
                                  const nn::MessageGraph& graph, const Matrix& x, const Vector& y,
                                  const Mask& eligible, std::uint64_t seed, int resamples = 3,
                                  double val_fraction = 0.2);

/// Seeded split of the nodes under `eligible`: (train, validation).
std::pair<Mask, Mask> split_train_val(const Mask& eligible, double val_fraction, std::uint64_t seed);

}  // namespace geohealth::cv
