#include "geohealth/spatial_cv/run_cv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geohealth/csv.hpp"
#include "geohealth/nn/checkpoint.hpp"
#include "geohealth/nn/train.hpp"
#include "geohealth/parallel.hpp"
#include "geohealth/rng.hpp"
#include "geohealth/spatial_cv/folds.hpp"

namespace geohealth::cv {

using nlohmann::json;

std::string_view to_string(CvScheme s) { return s == CvScheme::tenfold ? "tenfold" : "loocv"; }
std::string_view to_string(BufferRole r) { return r == BufferRole::train ? "train" : "excluded"; }

CvScheme scheme_from_string(std::string_view s) {
  if (s == "tenfold" || s == "10fold") return CvScheme::tenfold;
  if (s == "loocv") return CvScheme::loocv;
  throw Error(ErrorCode::InvalidConfig, "unknown cv scheme '" + std::string(s) + "'");
}

BufferRole buffer_role_from_string(std::string_view s) {
  if (s == "train") return BufferRole::train;
  if (s == "excluded") return BufferRole::excluded;
  throw Error(ErrorCode::InvalidConfig, "unknown buffer role '" + std::string(s) + "'");
}

void aggregate(CvResult& result) {
  std::vector<double> rmse, mae, r2;
  for (const auto& f : result.folds) {
    rmse.push_back(f.metrics.rmse);
    mae.push_back(f.metrics.mae);
    r2.push_back(f.metrics.r2);
  }
  result.rmse = mean_std(rmse);
  result.mae = mean_std(mae);
  result.r2 = mean_std(r2);
}

std::vector<FoldPlan> make_folds(const RegionGraph& graph, const CvOptions& options, Diagnostics* diag) {
  if (options.scheme == CvScheme::tenfold) return tenfold_split(graph, options.seed, options.hops, diag);
  const auto labels = group_labels(graph);
  const std::vector<std::string> groups = options.groups.empty() ? distinct_groups(labels) : options.groups;
  if (groups.empty()) throw Error(ErrorCode::UnknownGroup, "loocv needs region groups and none are present");
  std::vector<FoldPlan> plans;
  for (std::size_t g = 0; g < groups.size(); ++g)
    plans.push_back(loocv_region_split(graph, labels, groups[g], options.hops, static_cast<int>(g)));
  return plans;
}

namespace {

void audit(const FoldPlan& plan, const Mask& train, const Mask& val) {
  for (Index t : plan.test_nodes) {
    const auto i = static_cast<std::size_t>(t);
    if (train[i] || val[i])
      throw Error(ErrorCode::LeakageDetected, "fold " + std::to_string(plan.fold_id) + ": test node " +
                                                  std::to_string(t) + " is in a loss mask");
  }
}

}  // namespace

CvResult run_folds(const RegionGraph& graph, const Matrix& x, const Vector& y, const std::vector<FoldPlan>& folds,
                   const FoldPredictor& predictor, const CvOptions& options, Diagnostics* diag) {
  const std::size_t n = graph.size();
  if (static_cast<std::size_t>(x.rows()) != n || static_cast<std::size_t>(y.size()) != n)
    throw Error(ErrorCode::ShapeMismatch, "cv: features and targets must have one row per region");
  CvResult result;
  result.scheme = std::string(to_string(options.scheme));
  result.seed = options.seed;
  result.folds.resize(folds.size());
  std::vector<Diagnostics> fold_diag(folds.size());

  parallel_for(folds.size(), options.jobs, [&](std::size_t f) {
    const FoldPlan& plan = folds[f];
    validate_fold_plan(graph, plan);
    Mask eligible(n, false);
    for (Index v : plan.train_nodes) eligible[static_cast<std::size_t>(v)] = std::isfinite(y(v));
    if (options.buffer_role == BufferRole::train)
      for (Index v : plan.buffer_nodes) eligible[static_cast<std::size_t>(v)] = std::isfinite(y(v));
    if (count(eligible) == 0)
      throw Error(ErrorCode::EmptyTrainSet, "fold " + std::to_string(plan.fold_id) + " has no labelled training node");

    const std::uint64_t fold_seed = derive_seed(options.seed, 1000 + static_cast<std::uint64_t>(plan.fold_id));
    auto [train_mask, val_mask] = split_train_val(eligible, options.val_fraction, fold_seed);
    if (count(train_mask) == 0) std::swap(train_mask, val_mask);
    audit(plan, train_mask, val_mask);

    Vector y_train = y;
    for (Index t : plan.test_nodes) y_train(t) = std::numeric_limits<double>::quiet_NaN();

    FoldContext ctx{graph, x, y_train, plan, train_mask, val_mask, derive_seed(fold_seed, 1)};
    FoldOutput out = predictor(ctx);
    if (out.test_predictions.size() != static_cast<Index>(plan.test_nodes.size()))
      throw Error(ErrorCode::ShapeMismatch, "predictor returned the wrong number of test predictions");

    FoldResult& r = result.folds[f];
    r.fold_id = plan.fold_id;
    r.test_nodes = plan.test_nodes;
    r.predictions = out.test_predictions;
    r.loss_nodes = nodes_from(train_mask);
    r.val_nodes = nodes_from(val_mask);
    r.best_epoch = out.best_epoch;
    Vector yt(static_cast<Index>(plan.test_nodes.size()));
    Mask labelled(plan.test_nodes.size());
    for (std::size_t k = 0; k < plan.test_nodes.size(); ++k) {
      yt(static_cast<Index>(k)) = y(plan.test_nodes[k]);
      labelled[k] = std::isfinite(yt(static_cast<Index>(k)));
    }
    r.metrics = compute_metrics(out.test_predictions, yt, labelled, &fold_diag[f]);
  });

  for (std::size_t f = 0; f < folds.size(); ++f)
    for (const auto& w : fold_diag[f].warnings) warn(diag, "fold " + std::to_string(folds[f].fold_id) + ": " + w);
  aggregate(result);
  return result;
}

FoldPredictor gnn_predictor(const nn::ModelSpec& spec, const nn::TrainConfig& config) {
  return [spec, config](const FoldContext& ctx) {
    const nn::MessageGraph full = nn::make_message_graph(ctx.graph);
    nn::TrainConfig c = config;
    c.seed = ctx.seed;
    const nn::TrainedModel model = nn::train(spec, full, ctx.x, ctx.y_train, ctx.train_mask, ctx.val_mask, c);

    const BufferedSubgraph sub = subgraph_with_buffer(ctx.graph, ctx.plan.test_nodes, ctx.plan.hops, ctx.plan.fold_id);
    Matrix xs(static_cast<Index>(sub.to_parent.size()), ctx.x.cols());
    for (std::size_t k = 0; k < sub.to_parent.size(); ++k) xs.row(static_cast<Index>(k)) = ctx.x.row(sub.to_parent[k]);
    const nn::Prediction pred = nn::forward(model, nn::make_message_graph(sub.subgraph), xs);

    FoldOutput out;
    out.best_epoch = model.best_epoch;
    out.test_predictions.resize(static_cast<Index>(ctx.plan.test_nodes.size()));
    for (std::size_t t = 0; t < ctx.plan.test_nodes.size(); ++t) {
      const auto it = std::lower_bound(sub.to_parent.begin(), sub.to_parent.end(), ctx.plan.test_nodes[t]);
      out.test_predictions(static_cast<Index>(t)) = pred.values(it - sub.to_parent.begin());
    }
    return out;
  };
}

std::string_view to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::ols: return "ols";
    case BaselineKind::slm: return "slm";
    case BaselineKind::gwr: return "gwr";
  }
  return "unknown";
}

BaselineKind baseline_from_string(std::string_view s) {
  for (BaselineKind k : {BaselineKind::ols, BaselineKind::slm, BaselineKind::gwr})
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::InvalidConfig, "unknown baseline '" + std::string(s) + "'");
}

namespace {

Matrix gather_rows(const Matrix& x, const NodeSet& nodes) {
  Matrix out(static_cast<Index>(nodes.size()), x.cols());
  for (std::size_t k = 0; k < nodes.size(); ++k) out.row(static_cast<Index>(k)) = x.row(nodes[k]);
  return out;
}

Vector gather(const Vector& y, const NodeSet& nodes) {
  Vector out(static_cast<Index>(nodes.size()));
  for (std::size_t k = 0; k < nodes.size(); ++k) out(static_cast<Index>(k)) = y(nodes[k]);
  return out;
}

}  // namespace

FoldPredictor baseline_predictor(BaselineKind kind, baselines::GwrConfig gwr) {
  return [kind, gwr](const FoldContext& ctx) {
    Mask fit_mask = ctx.train_mask;
    for (std::size_t i = 0; i < fit_mask.size(); ++i) fit_mask[i] = fit_mask[i] || ctx.val_mask[i];
    const NodeSet fit_nodes = nodes_from(fit_mask);
    const Matrix xf = gather_rows(ctx.x, fit_nodes);
    const Vector yf = gather(ctx.y_train, fit_nodes);
    const Matrix xt = gather_rows(ctx.x, ctx.plan.test_nodes);
    FoldOutput out;
    switch (kind) {
      case BaselineKind::ols:
        out.test_predictions = baselines::ols_fit(xf, yf).predict(xt);
        break;
      case BaselineKind::slm: {
        const baselines::SlmFit fit = baselines::slm_fit(ctx.graph.induced(fit_nodes), xf, yf);
        const BufferedSubgraph sub =
            subgraph_with_buffer(ctx.graph, ctx.plan.test_nodes, ctx.plan.hops, ctx.plan.fold_id);
        const Vector pred = baselines::slm_predict(fit, sub.subgraph, gather_rows(ctx.x, sub.to_parent));
        out.test_predictions.resize(static_cast<Index>(ctx.plan.test_nodes.size()));
        for (std::size_t t = 0; t < ctx.plan.test_nodes.size(); ++t) {
          const auto it = std::lower_bound(sub.to_parent.begin(), sub.to_parent.end(), ctx.plan.test_nodes[t]);
          out.test_predictions(static_cast<Index>(t)) = pred(it - sub.to_parent.begin());
        }
        break;
      }
      case BaselineKind::gwr: {
        const std::vector<Point> all = baselines::centroids(ctx.graph);
        std::vector<Point> train_locs, test_locs;
        for (Index v : fit_nodes) train_locs.push_back(all[static_cast<std::size_t>(v)]);
        for (Index v : ctx.plan.test_nodes) test_locs.push_back(all[static_cast<std::size_t>(v)]);
        baselines::GwrConfig cfg = gwr;
        cfg.adaptive_k.reset();
        const baselines::GwrFit fit = baselines::gwr_fit_predict(train_locs, xf, yf, cfg);
        out.test_predictions = baselines::gwr_predict(train_locs, xf, yf, test_locs, xt, fit.bandwidth);
        break;
      }
    }
    return out;
  };
}

CvResult run_cv(const RegionGraph& graph, const Matrix& x, const Vector& y, const nn::ModelSpec& spec,
                const nn::TrainConfig& config, const CvOptions& options, Diagnostics* diag) {
  const std::vector<FoldPlan> folds = make_folds(graph, options, diag);
  nn::ModelSpec chosen_spec = spec;
  nn::TrainConfig chosen_config = config;
  json search_log;
  if (options.search_rounds > 0) {
    // One search, on the labelled training nodes of the first fold.
    Mask eligible(graph.size(), false);
    for (Index v : folds.front().train_nodes) eligible[static_cast<std::size_t>(v)] = std::isfinite(y(v));
    if (options.buffer_role == BufferRole::train)
      for (Index v : folds.front().buffer_nodes) eligible[static_cast<std::size_t>(v)] = std::isfinite(y(v));
    Vector y_search = y;
    for (Index t : folds.front().test_nodes) y_search(t) = std::numeric_limits<double>::quiet_NaN();
    const nn::MessageGraph mg = nn::make_message_graph(graph);
    const std::uint64_t search_seed = derive_seed(options.seed, 77);
    const SearchResult sr = random_search(
        options.space, options.search_rounds, search_seed,
        [&](const TrialConfig& t, int index) {
          return inner_validation_objective(apply(t, spec), apply(t, config), mg, x, y_search, eligible,
                                            derive_seed(search_seed, static_cast<std::uint64_t>(index)), 3,
                                            options.val_fraction);
        },
        options.jobs);
    chosen_spec = apply(sr.best, spec);
    chosen_config = apply(sr.best, config);
    search_log = {{"rounds", options.search_rounds}, {"best_index", sr.best_index}, {"trials", json::array()}};
    for (const Trial& t : sr.trials)
      search_log["trials"].push_back(
          {{"index", t.index}, {"config", trial_to_json(t.config)},
           {"objective", std::isfinite(t.objective) ? json(t.objective) : json(nullptr)}});
  }
  CvResult result = run_folds(graph, x, y, folds, gnn_predictor(chosen_spec, chosen_config), options, diag);
  result.model = std::string(nn::to_string(chosen_spec.architecture));
  result.config = {{"model", nn::spec_to_json(chosen_spec)},
                   {"train", nn::train_config_to_json(chosen_config)},
                   {"scheme", std::string(to_string(options.scheme))},
                   {"hops", options.hops},
                   {"buffer_role", std::string(to_string(options.buffer_role))},
                   {"val_fraction", options.val_fraction}};
  result.search = std::move(search_log);
  return result;
}

std::string results_csv(const CvResult& result) {
  csv::Writer w({"fold", "metric", "value"});
  for (const auto& f : result.folds) {
    const std::string id = std::to_string(f.fold_id);
    w.row({id, "rmse", csv::format_number(f.metrics.rmse)});
    w.row({id, "mae", csv::format_number(f.metrics.mae)});
    w.row({id, "r2", csv::format_number(f.metrics.r2)});
  }
  return w.str();
}

std::string predictions_csv(const CvResult& result, const RegionGraph& graph, const Vector& y) {
  csv::Writer w({"id", "y", "yhat", "fold"});
  for (const auto& f : result.folds)
    for (std::size_t k = 0; k < f.test_nodes.size(); ++k) {
      const Index v = f.test_nodes[k];
      w.row({graph.region(v).id, csv::format_number(y(v)), csv::format_number(f.predictions(static_cast<Index>(k))),
             std::to_string(f.fold_id)});
    }
  return w.str();
}

json summary_json(const CvResult& result) {
  auto stat = [](const MeanStd& s) {
    return json{{"mean", std::isfinite(s.mean) ? json(s.mean) : json(nullptr)},
                {"std", std::isfinite(s.std) ? json(s.std) : json(nullptr)},
                {"formatted", format_mean_std(s)}};
  };
  json j = {{"model", result.model},
            {"scheme", result.scheme},
            {"config", result.config},
            {"seed", result.seed},
            {"folds", result.folds.size()},
            {"aggregate", {{"rmse", stat(result.rmse)}, {"mae", stat(result.mae)}, {"r2", stat(result.r2)}}}};
  if (!result.search.is_null()) j["search"] = result.search;
  return j;
}

}  // namespace geohealth::cv
