#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geohealth/baselines.hpp"
#include "geohealth/geo_graph.hpp"
#include "geohealth/nn/model.hpp"
#include "geohealth/nn/optim.hpp"
#include "geohealth/spatial_cv/metrics.hpp"
#include "geohealth/spatial_cv/search.hpp"

namespace geohealth::cv {

enum class CvScheme { tenfold, loocv };
/// Role of buffer nodes during training: labelled training nodes, or dropped.
enum class BufferRole { train, excluded };

std::string_view to_string(CvScheme s);
std::string_view to_string(BufferRole r);
CvScheme scheme_from_string(std::string_view s);
BufferRole buffer_role_from_string(std::string_view s);

struct CvOptions {
  CvScheme scheme = CvScheme::tenfold;
  int hops = 2;
  BufferRole buffer_role = BufferRole::train;
  /// LOOCV test groups; empty means every distinct region group.
  std::vector<std::string> groups;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;
  int jobs = 1;
  /// Random-search rounds run once before the folds; 0 keeps the given spec.
  int search_rounds = 0;
  SearchSpace space;
};

/// Everything a predictor may see for one fold. `y_train` holds NaN at every
/// test node, so a leaked test label poisons the loss.
struct FoldContext {
  const RegionGraph& graph;
  const Matrix& x;
  const Vector& y_train;
  const FoldPlan& plan;
  Mask train_mask;  ///< loss nodes
  Mask val_mask;    ///< early-stopping nodes
  std::uint64_t seed = 0;
};

struct FoldOutput {
  Vector test_predictions;  ///< aligned with plan.test_nodes
  int best_epoch = 0;
};

using FoldPredictor = std::function<FoldOutput(const FoldContext&)>;

struct FoldResult {
  int fold_id = 0;
  Metrics metrics;
  NodeSet test_nodes;
  Vector predictions;  ///< aligned with test_nodes
  NodeSet loss_nodes;
  NodeSet val_nodes;
  int best_epoch = 0;
};

struct CvResult {
  std::string model;
  std::string scheme;
  std::vector<FoldResult> folds;
  MeanStd rmse, mae, r2;
  nlohmann::json config;
  std::uint64_t seed = 0;
  nlohmann::json search;  ///< trial log when a search ran
};

/// Mean and population std of the per-fold metrics (NaN folds included).
void aggregate(CvResult& result);

/// Fold plans for the scheme in `options`.
std::vector<FoldPlan> make_folds(const RegionGraph& graph, const CvOptions& options, Diagnostics* diag = nullptr);

/// Generic fold loop. Unlabelled nodes (NaN in y) never enter a loss or a
/// metric. Test labels are blanked before the predictor runs and the masks
/// it receives are audited against the test set.
CvResult run_folds(const RegionGraph& graph, const Matrix& x, const Vector& y, const std::vector<FoldPlan>& folds,
                   const FoldPredictor& predictor, const CvOptions& options, Diagnostics* diag = nullptr);

/// Transductive training on the full graph with test losses masked; test
/// inference on the subgraph induced by test ∪ buffer.
FoldPredictor gnn_predictor(const nn::ModelSpec& spec, const nn::TrainConfig& config);

enum class BaselineKind { ols, slm, gwr };

std::string_view to_string(BaselineKind k);
BaselineKind baseline_from_string(std::string_view s);

/// Baselines fitted on the fold's labelled training nodes (loss and
/// validation nodes together). SLM is fitted on the subgraph induced by those
/// nodes and predicts the test nodes through its reduced form on test ∪
/// buffer; GWR selects its bandwidth by leave-one-out on the training sample.
FoldPredictor baseline_predictor(BaselineKind kind, baselines::GwrConfig gwr = {});

CvResult run_cv(const RegionGraph& graph, const Matrix& x, const Vector& y, const nn::ModelSpec& spec,
                const nn::TrainConfig& config, const CvOptions& options, Diagnostics* diag = nullptr);

/// "fold,metric,value"
std::string results_csv(const CvResult& result);
/// "id,y,yhat,fold"
std::string predictions_csv(const CvResult& result, const RegionGraph& graph, const Vector& y);
/// {model, scheme, config, seed, aggregate, formatted}
nlohmann::json summary_json(const CvResult& result);

}  // namespace geohealth::cv
