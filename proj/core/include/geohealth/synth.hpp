#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "geohealth/features.hpp"
#include "geohealth/geo_graph.hpp"

namespace geohealth::synth {

struct CollinearPair {
  int source = 0;
  double noise_std = 0.001;
};

struct OutcomeSpec {
  std::vector<double> beta{1.0};  ///< shorter than n_features: the rest are 0
  double rho = 0.0;
  bool nonlinear = false;  ///< adds feature0^2
  double noise_std = 0.1;
};

struct SynthConfig {
  int grid_rows = 10;
  int grid_cols = 10;
  int n_features = 5;
  int smoothing_passes = 0;
  std::vector<CollinearPair> collinear_pairs;
  OutcomeSpec outcome;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json config_to_json(const SynthConfig& c);
SynthConfig config_from_json(const nlohmann::json& j);

struct SynthData {
  std::vector<Region> regions;  ///< unit-square cells, groups Q1..Q4
  RegionGraph graph;            ///< queen contiguity of the cells
  FeatureTable features;        ///< f0..f{n-1}, then the collinear copies
  TargetVector target;
  Vector signal;                ///< noiseless part of y
  nlohmann::json ground_truth;
};

/// Cell (r, c) spans [c/cols, (c+1)/cols] x [r/rows, (r+1)/rows]; ids are
/// "r<r>c<c>". Base features are standard normal, averaged over each cell's
/// closed queen neighbourhood `smoothing_passes` times, then standardised.
/// y = X b + rho * W (X b) [+ f0^2] + noise with W row-standardised.
SynthData generate(const SynthConfig& config);

/// File name and content of every artifact `write` produces.
std::vector<std::pair<std::string, std::string>> render(const SynthData& data, const SynthConfig& config);

/// Writes regions.geojson, features.csv, targets.csv, ground_truth.json and
/// config.json; returns the written paths.
std::vector<std::filesystem::path> write(const SynthData& data, const SynthConfig& config,
                                         const std::filesystem::path& dir);

/// Correlation between each value and the mean over its neighbours.
double neighbor_correlation(const RegionGraph& graph, const Vector& values);

}  // namespace geohealth::synth
