#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "geohealth/baselines.hpp"
#include "geohealth/csv.hpp"
#include "geohealth/encodings.hpp"
#include "geohealth/explain.hpp"
#include "geohealth/geo_io.hpp"
#include "geohealth/nn/checkpoint.hpp"
#include "geohealth/nn/train.hpp"
#include "geohealth/rng.hpp"
#include "geohealth/spatial_cv/ablation.hpp"
#include "geohealth/spatial_cv/run_cv.hpp"
#include "geohealth/synth.hpp"

namespace geohealth::cli {

using nlohmann::json;

nn::ModelSpec ModelArgs::spec() const {
  nn::ModelSpec s;
  s.architecture = nn::architecture_from_string(architecture);
  s.depth = depth;
  s.hidden1 = hidden1;
  s.hidden2 = hidden2;
  s.dropout = dropout;
  s.activation = nn::activation_from_string(activation);
  s.gat_heads = heads;
  s.validate();
  return s;
}

nn::TrainConfig ModelArgs::train_config(std::uint64_t seed) const {
  nn::TrainConfig c;
  c.lr = lr;
  c.weight_decay = weight_decay;
  c.optimizer = nn::optimizer_from_string(optimizer);
  c.epochs = epochs;
  c.patience = patience;
  c.seed = seed;
  c.validate();
  return c;
}

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json metrics_json(const cv::Metrics& m) {
  return {{"rmse", number_or_null(m.rmse)}, {"mae", number_or_null(m.mae)}, {"r2", number_or_null(m.r2)}};
}

Mask labelled(const Vector& y) {
  Mask m(static_cast<std::size_t>(y.size()));
  for (Index i = 0; i < y.size(); ++i) m[static_cast<std::size_t>(i)] = std::isfinite(y(i));
  return m;
}

/// "random_walk_3" -> "random_walk"; anything else is a plain feature.
std::string column_source(const std::string& name) {
  for (EncodingKind k : {EncodingKind::laplacian_smooth, EncodingKind::laplacian_spectral, EncodingKind::random_walk,
                         EncodingKind::location}) {
    const std::string prefix = std::string(to_string(k)) + "_";
    if (name.size() > prefix.size() && name.compare(0, prefix.size(), prefix) == 0 &&
        name.find_first_not_of("0123456789", prefix.size()) == std::string::npos)
      return std::string(to_string(k));
  }
  return "feature";
}

NodeEncoding location_encoding(RunContext& ctx, const RegionGraph& graph, const std::string& path, int dim,
                               int frequencies) {
  if (path.empty()) {
    ctx.diagnostics().warn("no location embeddings given; using the sinusoidal coordinate encoding");
    return fallback_coordinate_encoding(graph, frequencies);
  }
  NodeEncoding e = load_location_embeddings(ctx.input(path), graph);
  return dim > 0 ? pca_reduce(e, dim) : e;
}

std::string matrix_csv(const RegionGraph& graph, const Matrix& m, const std::string& prefix) {
  std::vector<std::string> header{"id"};
  for (Index c = 0; c < m.cols(); ++c) header.push_back(prefix + std::to_string(c + 1));
  csv::Writer w(header);
  for (Index i = 0; i < m.rows(); ++i) {
    std::vector<std::string> row{graph.region(i).id};
    for (Index c = 0; c < m.cols(); ++c) row.push_back(csv::format_number(m(i, c)));
    w.row(row);
  }
  return w.str();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

void cmd_build_graph(RunContext& ctx, const BuildGraphArgs& a) {
  std::vector<Region> regions = io::load_regions(ctx.input(a.graph.regions));
  RegionGraph graph;
  if (a.graph.method == "contiguity") graph = build_contiguity_graph(std::move(regions), a.tolerance);
  else if (a.graph.method == "knn") graph = knn_graph(std::move(regions), a.graph.k);
  else throw Error(ErrorCode::InvalidConfig, "unknown graph method '" + a.graph.method + "'");
  if (a.graph.graph_hops < 1) throw Error(ErrorCode::InvalidConfig, "hops must be >= 1");
  if (a.graph.graph_hops > 1) graph = khop_expand(graph, a.graph.graph_hops);

  ctx.write("graph.csv", io::edge_list_csv(graph));
  ctx.write("regions.csv", io::regions_to_csv(graph.regions()));
  const auto components = connected_components(graph);
  if (components.size() > 1) ctx.diagnostics().warn("graph has " + std::to_string(components.size()) + " components");
  ctx.write("graph_summary.json", dump({{"nodes", graph.size()},
                                        {"edges", graph.edge_count()},
                                        {"components", components.size()},
                                        {"method", a.graph.method},
                                        {"hops", a.graph.graph_hops}}));
}

void cmd_preprocess(RunContext& ctx, const PreprocessArgs& a) {
  std::set<std::string> fixed(a.fixed_columns.begin(), a.fixed_columns.end());
  if (!a.fixed_file.empty()) {
    const auto more = read_name_list(ctx.input(a.fixed_file));
    fixed.insert(more.begin(), more.end());
  }
  std::vector<std::string> order;
  if (!a.regions.empty())
    for (const Region& r : io::load_regions(ctx.input(a.regions))) order.push_back(r.id);
  FeatureTable table = load_feature_table(ctx.input(a.features), fixed, order.empty() ? nullptr : &order, ctx.diag());
  for (const auto& name : fixed)
    if (!table.column_index(name)) throw Error(ErrorCode::MissingColumn, "fixed column '" + name + "' not in features");

  const Matrix corr = correlation_matrix(table, ctx.diag());
  {
    std::vector<std::string> header{"column"};
    for (const auto& c : table.columns) header.push_back(c.name);
    csv::Writer w(header);
    for (std::size_t r = 0; r < table.cols(); ++r) {
      std::vector<std::string> row{table.columns[r].name};
      for (std::size_t c = 0; c < table.cols(); ++c)
        row.push_back(csv::format_number(corr(static_cast<Index>(r), static_cast<Index>(c))));
      w.row(row);
    }
    ctx.write("correlation.csv", w.str());
  }

  json summary = {{"input_columns", table.cols()}, {"rows", table.rows()}, {"valid_rows", count(table.valid)}};
  if (!a.skip_vif) {
    const VifSelection sel = vif_select(table, a.vif_free, a.vif_fixed);
    ctx.write("vif_removals.csv", removal_log_csv(sel));
    ctx.write("vif_violations.csv", violations_csv(sel));
    for (const auto& v : sel.violations)
      ctx.diagnostics().warn("fixed column '" + v.column + "' has VIF " + csv::format_number(v.vif));
    json final_vif = json::object();
    for (std::size_t k = 0; k < sel.retained.size(); ++k)
      final_vif[table.columns[sel.retained[k]].name] = number_or_null(sel.final_vif[k]);
    summary["removed"] = sel.removals.size();
    summary["final_vif"] = final_vif;
    table = select_columns(table, sel.retained);
  }
  if (!a.no_standardize) {
    table = standardize(table, ctx.diag());
    csv::Writer w({"column", "mean", "std"});
    for (std::size_t c = 0; c < table.cols(); ++c)
      w.row({table.columns[c].name, csv::format_number(table.column_means(static_cast<Index>(c))),
             csv::format_number(table.column_stds(static_cast<Index>(c)))});
    ctx.write("standardization.csv", w.str());
  }
  summary["output_columns"] = table.column_names();
  ctx.write("features_selected.csv", feature_table_csv(table));
  ctx.write("preprocess_summary.json", dump(summary));
}

void cmd_encode(RunContext& ctx, const EncodeArgs& a) {
  const RegionGraph graph = load_region_graph(ctx, a.graph);
  const FeatureTable base = load_features(ctx, a.features, graph);
  std::vector<NodeEncoding> encs;
  for (const auto& name : a.encodings) {
    if (name == "none") continue;
    const EncodingKind kind = encoding_kind_from_string(name);
    switch (kind) {
      case EncodingKind::laplacian_spectral:
        encs.push_back(laplacian_spectral_pe(graph, a.laplacian_dim).encoding);
        break;
      case EncodingKind::laplacian_smooth:
        encs.push_back(laplacian_smooth(graph, base.values, a.smooth_lambda));
        break;
      case EncodingKind::random_walk:
        encs.push_back(random_walk_pe(graph, a.rw_steps));
        break;
      case EncodingKind::location:
        encs.push_back(location_encoding(ctx, graph, a.location, a.location_dim, a.fallback_frequencies));
        break;
    }
    ctx.write("encoding_" + std::string(to_string(kind)) + ".csv", encoding_csv(encs.back(), graph));
  }
  const AssembledFeatures assembled = assemble_features(base, encs);
  FeatureTable out;
  out.region_ids = base.region_ids;
  for (const auto& n : assembled.column_names) out.columns.push_back({n, false});
  out.values = assembled.values;
  out.valid = base.valid;
  ctx.write("node_features.csv", feature_table_csv(out));
  csv::Writer prov({"column", "source"});
  for (const auto& span : assembled.provenance)
    for (Index c = span.begin; c < span.end; ++c) prov.row({assembled.column_names[static_cast<std::size_t>(c)], span.source});
  ctx.write("provenance.csv", prov.str());
}

void cmd_train(RunContext& ctx, const TrainArgs& a, int) {
  const RegionGraph graph = load_region_graph(ctx, a.data.graph);
  const FeatureTable features = load_features(ctx, a.data.features, graph);
  const Vector y = load_outcome(ctx, a.data.targets, a.data.outcome, graph, features.valid);
  const nn::ModelSpec spec = a.model.spec();
  const nn::TrainConfig config = a.model.train_config(derive_seed(ctx.seed(), 1));
  const auto [train_mask, val_mask] = cv::split_train_val(labelled(y), a.val_fraction, derive_seed(ctx.seed(), 2));
  const nn::MessageGraph mg = nn::make_message_graph(graph);
  const nn::TrainedModel model = nn::train(spec, mg, features.values, y, train_mask, val_mask, config);
  const nn::Prediction pred = nn::forward(model, mg, features.values);

  ctx.write("model.json", model_to_json(model).dump(1) + "\n");
  ctx.write("training_log.csv", nn::training_log_csv(model));
  csv::Writer w({"id", "y", "yhat", "split"});
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto ii = static_cast<Index>(i);
    w.row({graph.region(ii).id, csv::format_number(y(ii)), csv::format_number(pred.values(ii)),
           train_mask[i] ? "train" : val_mask[i] ? "val" : "unlabelled"});
  }
  ctx.write("predictions.csv", w.str());
  json summary = {{"best_epoch", model.best_epoch},
                  {"epochs_run", model.training_log.size()},
                  {"train", metrics_json(cv::compute_metrics(pred.values, y, train_mask, ctx.diag()))}};
  if (count(val_mask) > 0) summary["val"] = metrics_json(cv::compute_metrics(pred.values, y, val_mask, ctx.diag()));
  ctx.write("train_summary.json", dump(summary));
}

void cmd_cv(RunContext& ctx, const CvArgs& a, int jobs) {
  const RegionGraph graph = load_region_graph(ctx, a.data.graph);
  const FeatureTable features = load_features(ctx, a.data.features, graph);
  const Vector y = load_outcome(ctx, a.data.targets, a.data.outcome, graph, features.valid);
  const nn::ModelSpec spec = a.model.spec();
  cv::CvOptions opt;
  opt.scheme = cv::scheme_from_string(a.scheme);
  opt.hops = a.hops < 0 ? spec.depth : a.hops;
  opt.buffer_role = cv::buffer_role_from_string(a.buffer_role);
  opt.groups = a.groups;
  opt.val_fraction = a.val_fraction;
  opt.seed = ctx.seed();
  opt.jobs = jobs;
  opt.search_rounds = a.search_rounds;
  if (!a.space.empty()) opt.space = cv::search_space_from_json(json::parse(csv::read_text(ctx.input(a.space))));
  const cv::CvResult r = cv::run_cv(graph, features.values, y, spec, a.model.train_config(ctx.seed()), opt, ctx.diag());
  ctx.write("cv_results.csv", cv::results_csv(r));
  ctx.write("cv_predictions.csv", cv::predictions_csv(r, graph, y));
  ctx.write("cv_summary.json", dump(cv::summary_json(r)));
}

void cmd_ablate(RunContext& ctx, const AblateArgs& a, int jobs) {
  GraphInputs base_in = a.data.graph;
  base_in.graph_hops = 1;
  const RegionGraph base = load_region_graph(ctx, base_in);
  const FeatureTable features = load_features(ctx, a.data.features, base);
  const Vector y = load_outcome(ctx, a.data.targets, a.data.outcome, base, features.valid);

  cv::AblationAxes axes;
  for (const auto& s : a.architectures) axes.architectures.push_back(nn::architecture_from_string(s));
  for (const auto& g : a.graphs) {
    if (g == "1-hop") {
      axes.graphs.push_back({g, base});
    } else if (g.size() > 4 && g.substr(g.size() - 4) == "-hop") {
      axes.graphs.push_back({g, khop_expand(base, std::stoi(g.substr(0, g.size() - 4)))});
    } else if (g.rfind("knn", 0) == 0) {
      const int k = g.size() > 4 && g[3] == ':' ? std::stoi(g.substr(4)) : a.knn_k;
      axes.graphs.push_back({g, knn_graph(base.regions(), k)});
    } else {
      throw Error(ErrorCode::InvalidConfig, "unknown graph option '" + g + "'");
    }
  }
  axes.depths = a.depths;

  std::map<std::string, Matrix> blocks;
  auto block = [&](const std::string& kind) -> const Matrix& {
    auto it = blocks.find(kind);
    if (it != blocks.end()) return it->second;
    Matrix m;
    switch (encoding_kind_from_string(kind)) {
      case EncodingKind::laplacian_spectral: m = laplacian_spectral_pe(base, a.laplacian_dim).encoding.values; break;
      case EncodingKind::laplacian_smooth: m = laplacian_smooth(base, features.values).values; break;
      case EncodingKind::random_walk: m = random_walk_pe(base, a.rw_steps).values; break;
      case EncodingKind::location:
        m = location_encoding(ctx, base, a.location, 0, a.fallback_frequencies).values;
        break;
    }
    return blocks.emplace(kind, std::move(m)).first->second;
  };
  for (const auto& e : a.encodings) {
    Matrix extra(static_cast<Index>(base.size()), 0);
    if (e != "none")
      for (const auto& part : split_list(e, '+')) {
        const Matrix& b = block(part);
        Matrix joined(extra.rows(), extra.cols() + b.cols());
        joined << extra, b;
        extra = std::move(joined);
      }
    axes.encodings.push_back({e, std::move(extra)});
  }

  cv::AblationOptions opt;
  opt.budget = a.budget;
  opt.seed = ctx.seed();
  opt.jobs = jobs;
  if (!a.space.empty()) opt.space = cv::search_space_from_json(json::parse(csv::read_text(ctx.input(a.space))));
  const cv::AblationResult r = cv::ablation_grid(features.values, y, labelled(y), axes, a.model.spec(),
                                                 a.model.train_config(ctx.seed()), opt);
  ctx.write("ablation.csv", cv::ablation_csv(r));
  ctx.write("ablation.json", dump(cv::ablation_json(r)));
}

void cmd_baselines(RunContext& ctx, const BaselinesArgs& a, int jobs) {
  const RegionGraph graph = load_region_graph(ctx, a.data.graph);
  const FeatureTable features = load_features(ctx, a.data.features, graph);
  const Vector y = load_outcome(ctx, a.data.targets, a.data.outcome, graph, features.valid);
  if (a.mode != "insample" && a.mode != "cv" && a.mode != "both")
    throw Error(ErrorCode::InvalidConfig, "mode must be insample, cv or both");
  const bool insample = a.mode != "cv", do_cv = a.mode != "insample";

  const Mask lab = labelled(y);
  const NodeSet nodes = nodes_from(lab);

  // columns spanned by the intercept and earlier kept columns make OLS rank
  // deficient; Gram-Schmidt over the labelled rows finds them in column order
  std::vector<Index> keep;
  json dropped_constant = json::array(), dropped_dependent = json::array();
  const auto m = static_cast<Index>(nodes.size());
  Matrix basis = Matrix::Constant(m, m > 0 ? 1 : 0, 1.0 / std::sqrt(static_cast<double>(std::max<Index>(m, 1))));
  for (Index c = 0; c < features.values.cols(); ++c) {
    Vector v(m);
    for (Index k = 0; k < m; ++k) v(k) = features.values(nodes[static_cast<std::size_t>(k)], c);
    const double scale = v.norm();
    Vector r = v;
    for (int pass = 0; pass < 2; ++pass) r -= basis * (basis.transpose() * r);
    const std::string& name = features.columns[static_cast<std::size_t>(c)].name;
    if (m > 0 && r.norm() <= 1e-9 * std::max(scale, 1e-300)) {
      const bool constant = (v.array() == v(0)).all();
      (constant ? dropped_constant : dropped_dependent).push_back(name);
      ctx.diagnostics().warn("baselines: dropped " + std::string(constant ? "constant" : "linearly dependent") +
                             " column '" + name + "'");
      continue;
    }
    keep.push_back(c);
    if (m > 0) {
      basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
      basis.rightCols(1) = r / r.norm();
    }
  }
  Matrix x(features.values.rows(), static_cast<Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) x.col(static_cast<Index>(k)) = features.values.col(keep[k]);
  Matrix xl(static_cast<Index>(nodes.size()), x.cols());
  Vector yl(static_cast<Index>(nodes.size()));
  std::vector<Point> locs;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    xl.row(static_cast<Index>(k)) = x.row(nodes[k]);
    yl(static_cast<Index>(k)) = y(nodes[k]);
    locs.push_back(graph.region(nodes[k]).centroid);
  }

  baselines::GwrConfig gwr;
  if (a.bandwidth > 0) gwr.bandwidth = a.bandwidth;
  if (a.adaptive_k > 0) gwr.adaptive_k = a.adaptive_k;

  cv::CvOptions opt;
  opt.scheme = cv::scheme_from_string(a.scheme);
  opt.hops = a.hops;
  opt.buffer_role = cv::buffer_role_from_string(a.buffer_role);
  opt.groups = a.groups;
  opt.seed = ctx.seed();
  opt.jobs = jobs;
  std::vector<FoldPlan> folds;
  if (do_cv) folds = cv::make_folds(graph, opt, ctx.diag());

  json summary = json::object();
  for (const auto& name : a.models) {
    const cv::BaselineKind kind = cv::baseline_from_string(name);
    csv::Writer results({"fold", "metric", "value"});
    csv::Writer preds({"id", "y", "yhat", "fold"});
    json entry = json::object();
    if (insample) {
      Vector fitted;
      json extra = json::object();
      switch (kind) {
        case cv::BaselineKind::ols: {
          const auto f = baselines::ols_fit(xl, yl);
          fitted = f.fitted;
          break;
        }
        case cv::BaselineKind::slm: {
          const auto f = baselines::slm_fit(graph.induced(nodes), xl, yl);
          fitted = f.fitted;
          extra = {{"rho", f.rho}, {"log_likelihood", f.log_likelihood}, {"pseudo_r2", f.r2}};
          break;
        }
        case cv::BaselineKind::gwr: {
          const auto f = baselines::gwr_fit_predict(locs, xl, yl, gwr, ctx.diag());
          fitted = f.predictions;
          extra = {{"bandwidth", f.bandwidth}, {"fallback_regions", f.fallback_regions.size()}};
          break;
        }
      }
      const cv::Metrics m = cv::compute_metrics(fitted, yl, {}, ctx.diag());
      results.row({"insample", "rmse", csv::format_number(m.rmse)});
      results.row({"insample", "mae", csv::format_number(m.mae)});
      results.row({"insample", "r2", csv::format_number(m.r2)});
      for (std::size_t k = 0; k < nodes.size(); ++k)
        preds.row({graph.region(nodes[k]).id, csv::format_number(yl(static_cast<Index>(k))),
                   csv::format_number(fitted(static_cast<Index>(k))), "insample"});
      entry["insample"] = metrics_json(m);
      entry["insample"].update(extra);
    }
    if (do_cv) {
      cv::CvResult r = cv::run_folds(graph, x, y, folds, cv::baseline_predictor(kind, gwr), opt, ctx.diag());
      r.model = name;
      r.config = {{"scheme", a.scheme}, {"hops", a.hops}, {"buffer_role", a.buffer_role}};
      for (const auto& f : r.folds) {
        const std::string id = std::to_string(f.fold_id);
        results.row({id, "rmse", csv::format_number(f.metrics.rmse)});
        results.row({id, "mae", csv::format_number(f.metrics.mae)});
        results.row({id, "r2", csv::format_number(f.metrics.r2)});
        for (std::size_t k = 0; k < f.test_nodes.size(); ++k)
          preds.row({graph.region(f.test_nodes[k]).id, csv::format_number(y(f.test_nodes[k])),
                     csv::format_number(f.predictions(static_cast<Index>(k))), id});
      }
      entry["cv"] = cv::summary_json(r);
    }
    ctx.write(name + "_results.csv", results.str());
    ctx.write(name + "_predictions.csv", preds.str());
    summary[name] = entry;
  }
  for (const auto& ext : a.external) {
    const auto eq = ext.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, "external predictions must be name=path");
    const std::string name = ext.substr(0, eq);
    const Vector yhat = baselines::import_external_predictions(ctx.input(ext.substr(eq + 1)), graph);
    const cv::Metrics m = cv::compute_metrics(yhat, y, lab, ctx.diag());
    csv::Writer results({"fold", "metric", "value"});
    results.row({"external", "rmse", csv::format_number(m.rmse)});
    results.row({"external", "mae", csv::format_number(m.mae)});
    results.row({"external", "r2", csv::format_number(m.r2)});
    ctx.write(name + "_results.csv", results.str());
    summary[name] = {{"external", metrics_json(m)}};
  }
  if (!dropped_constant.empty()) summary["dropped_constant_columns"] = dropped_constant;
  if (!dropped_dependent.empty()) summary["dropped_dependent_columns"] = dropped_dependent;
  ctx.write("baselines_summary.json", dump(summary));
}

void cmd_explain(RunContext& ctx, const ExplainArgs& a) {
  const RegionGraph graph = load_region_graph(ctx, a.data.graph);
  const FeatureTable features = load_features(ctx, a.data.features, graph);
  const Vector y = load_outcome(ctx, a.data.targets, a.data.outcome, graph, features.valid);
  const nn::TrainedModel model = nn::load_model(ctx.input(a.model));
  const nn::MessageGraph mg = nn::make_message_graph(graph);
  const Matrix emb = explain::extract_embeddings(model, mg, features.values);
  const Vector yhat = nn::forward(model, mg, features.values).values;
  ctx.write("embeddings.csv", matrix_csv(graph, emb, "e"));

  explain::ReportInputs rep;
  rep.pca = explain::pca_embeddings(emb, a.variance, ctx.diag());
  std::vector<std::string> sources;
  for (const auto& c : features.columns) sources.push_back(column_source(c.name));
  rep.correlations =
      explain::pc_feature_correlations(rep.pca.scores, features.values, features.column_names(), sources, ctx.diag());
  const Mask lab = labelled(y);
  const NodeSet nodes = nodes_from(lab);
  Matrix sl(static_cast<Index>(nodes.size()), rep.pca.scores.cols());
  Vector yl(static_cast<Index>(nodes.size()));
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    sl.row(static_cast<Index>(k)) = rep.pca.scores.row(nodes[k]);
    yl(static_cast<Index>(k)) = y(nodes[k]);
  }
  rep.regression = explain::pc_outcome_regression(sl, yl, ctx.diag());
  rep.residuals = explain::residual_diagnostics(yhat, y, lab);
  rep.layers = explain::export_geo_layers(graph, rep.pca.scores, yhat, y, lab, ctx.diag());

  for (const auto& [name, content] : explain::render_report(graph, rep)) ctx.write(name, content);
}

void cmd_synth(RunContext& ctx, const SynthArgs& a) {
  synth::SynthConfig c;
  if (!a.config.empty()) {
    c = synth::config_from_json(json::parse(csv::read_text(ctx.input(a.config))));
  } else {
    c.grid_rows = a.rows;
    c.grid_cols = a.cols;
    c.n_features = a.n_features;
    c.smoothing_passes = a.passes;
    c.outcome.beta = a.beta;
    c.outcome.rho = a.rho;
    c.outcome.nonlinear = a.nonlinear;
    c.outcome.noise_std = a.noise;
    for (const auto& p : a.collinear) {
      const auto parts = split_list(p, ':');
      if (parts.empty() || parts.size() > 2) throw Error(ErrorCode::InvalidConfig, "collinear pair must be source[:noise]");
      c.collinear_pairs.push_back({std::stoi(parts[0]), parts.size() == 2 ? std::stod(parts[1]) : 0.001});
    }
  }
  c.seed = ctx.seed();
  const synth::SynthData data = synth::generate(c);
  for (const auto& [name, content] : synth::render(data, c)) ctx.write(name, content);
}

}  // namespace geohealth::cli
