#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geohealth/geo_graph.hpp"
#include "geohealth/nn/model.hpp"
#include "geohealth/nn/optim.hpp"
#include "geohealth/spatial_cv/search.hpp"

namespace geohealth::cv {

struct GraphOption {
  std::string name;  ///< e.g. "1-hop", "knn8"
  RegionGraph graph;
};

/// Node-feature variant: the columns appended to the base features.
struct EncodingOption {
  std::string name;  ///< e.g. "none", "random_walk+location"
  Matrix extra;      ///< N x d, d may be 0
};

struct AblationAxes {
  std::vector<nn::Architecture> architectures;
  std::vector<GraphOption> graphs;
  std::vector<int> depths;
  std::vector<EncodingOption> encodings;

  void validate() const;
};

struct AblationRow {
  std::string axis;
  std::string option;
  std::string architecture;
  std::string graph;
  int depth = 0;
  std::string encoding;
  double mean_val_r2 = 0.0;
  TrialConfig best_trial;
  bool winner = false;
};

struct AblationResult {
  std::vector<AblationRow> rows;
  std::string best_architecture;
  std::string best_graph;
  int best_depth = 0;
  std::string best_encoding;
};

struct AblationOptions {
  int budget = 10;  ///< random-search rounds per cell
  std::uint64_t seed = 0;
  int jobs = 1;
  int resamples = 3;
  double val_fraction = 0.2;
  SearchSpace space;
};

/// Greedy axis-by-axis search: architecture, graph, depth, encoding. Each
/// cell is scored by its best random-search trial (mean validation R2 over
/// seeded 80:20 resamples of `labelled`); each axis is fixed at its winner
/// (first listed on ties) before the next. Cells on earlier axes use the
/// first option of every later axis.
AblationResult ablation_grid(const Matrix& base_features, const Vector& y, const Mask& labelled,
                             const AblationAxes& axes, const nn::ModelSpec& base_spec,
                             const nn::TrainConfig& base_config, const AblationOptions& options);

/// "axis,option,architecture,graph,depth,encoding,mean_val_r2,winner"
std::string ablation_csv(const AblationResult& result);
nlohmann::json ablation_json(const AblationResult& result);

}  // namespace geohealth::cv
