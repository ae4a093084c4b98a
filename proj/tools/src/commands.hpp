#pragma once

#include <string>
#include <vector>

#include "geohealth/nn/model.hpp"
#include "geohealth/nn/optim.hpp"
#include "inputs.hpp"
#include "run_context.hpp"

namespace geohealth::cli {

struct ModelArgs {
  std::string architecture = "gatv2";
  int depth = 2;
  int hidden1 = 128;
  int hidden2 = 64;
  double dropout = 0.1;
  std::string activation = "relu";
  int heads = 1;
  double lr = 0.001;
  double weight_decay = 5e-4;
  std::string optimizer = "adam";
  int epochs = 300;
  int patience = 20;

  nn::ModelSpec spec() const;
  nn::TrainConfig train_config(std::uint64_t seed) const;
};

struct DataArgs {
  GraphInputs graph;
  std::string features;
  std::string targets;
  std::string outcome = "outcome";
};

struct BuildGraphArgs {
  GraphInputs graph;
  double tolerance = 1e-9;
};

struct PreprocessArgs {
  std::string features;
  std::string regions;
  std::string fixed_file;
  std::vector<std::string> fixed_columns;
  double vif_free = 1000.0;
  double vif_fixed = 1500.0;
  bool skip_vif = false;
  bool no_standardize = false;
};

struct EncodeArgs {
  GraphInputs graph;
  std::string features;
  std::vector<std::string> encodings;
  int laplacian_dim = 8;
  int rw_steps = 1;
  std::string location;
  int location_dim = 0;
  int fallback_frequencies = 4;
  double smooth_lambda = 1.0;
};

struct TrainArgs {
  DataArgs data;
  ModelArgs model;
  double val_fraction = 0.2;
};

struct CvArgs {
  DataArgs data;
  ModelArgs model;
  std::string scheme = "tenfold";
  int hops = -1;  ///< -1: model depth
  std::string buffer_role = "train";
  std::vector<std::string> groups;
  int search_rounds = 0;
  std::string space;
  double val_fraction = 0.2;
};

struct AblateArgs {
  DataArgs data;
  ModelArgs model;
  std::vector<std::string> architectures{"gcn", "gin", "graphsage", "gatv2"};
  std::vector<std::string> graphs{"1-hop", "2-hop", "3-hop", "knn"};
  int knn_k = 8;
  std::vector<int> depths{1, 2, 3};
  std::vector<std::string> encodings{"none",
                                     "laplacian",
                                     "random_walk",
                                     "location",
                                     "laplacian+random_walk",
                                     "laplacian+location",
                                     "random_walk+location"};
  int laplacian_dim = 8;
  int rw_steps = 1;
  std::string location;
  int fallback_frequencies = 4;
  int budget = 10;
  std::string space;
};

struct BaselinesArgs {
  DataArgs data;
  std::vector<std::string> models{"ols", "slm", "gwr"};
  std::string mode = "both";
  std::string scheme = "tenfold";
  int hops = 2;
  std::string buffer_role = "train";
  std::vector<std::string> groups;
  double bandwidth = 0.0;
  int adaptive_k = 0;
  std::vector<std::string> external;  ///< name=path
};

struct ExplainArgs {
  DataArgs data;
  std::string model;
  double variance = 0.80;
};

struct SynthArgs {
  std::string config;
  int rows = 10;
  int cols = 10;
  int n_features = 5;
  int passes = 0;
  double rho = 0.0;
  std::vector<double> beta{1.0};
  bool nonlinear = false;
  double noise = 0.1;
  std::vector<std::string> collinear;  ///< source:noise
};

void cmd_build_graph(RunContext& ctx, const BuildGraphArgs& a);
void cmd_preprocess(RunContext& ctx, const PreprocessArgs& a);
void cmd_encode(RunContext& ctx, const EncodeArgs& a);
void cmd_train(RunContext& ctx, const TrainArgs& a, int jobs);
void cmd_cv(RunContext& ctx, const CvArgs& a, int jobs);
void cmd_ablate(RunContext& ctx, const AblateArgs& a, int jobs);
void cmd_baselines(RunContext& ctx, const BaselinesArgs& a, int jobs);
void cmd_explain(RunContext& ctx, const ExplainArgs& a);
void cmd_synth(RunContext& ctx, const SynthArgs& a);

}  // namespace geohealth::cli
