#include "geohealth/explain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geohealth/baselines.hpp"
#include "geohealth/csv.hpp"
#include "geohealth/linalg.hpp"

namespace geohealth::explain {

using nlohmann::json;

Matrix extract_embeddings(const nn::TrainedModel& model, const nn::MessageGraph& graph, const Matrix& x) {
  if (!model.trained()) throw Error(ErrorCode::UntrainedModel, "model has not been trained");
  return nn::forward(model, graph, x).embedding;
}

PcaSelection pca_embeddings(const Matrix& embeddings, double variance_target, Diagnostics* diag) {
  if (embeddings.rows() < 2) throw Error(ErrorCode::TooFewRows, "pca needs at least two rows");
  if (!(variance_target > 0.0 && variance_target <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "variance target must lie in (0, 1]");
  const RowVector first = embeddings.row(0);
  if (((embeddings.rowwise() - first).array().abs() > 0.0).count() == 0)
    throw Error(ErrorCode::DegenerateData, "all embedding rows are identical");

  const linalg::Pca p = linalg::pca(embeddings);
  PcaSelection out;
  out.ratios = p.ratios;
  out.variances = p.variances;
  double cumulative = 0.0;
  int n = 0;
  const double tol = 1e-12;
  while (n < p.ratios.size()) {
    cumulative += p.ratios(n);
    ++n;
    if (cumulative >= variance_target - tol) break;
  }
  if (cumulative < variance_target - tol)
    warn(diag, "selected components explain only " + csv::format_number(cumulative) + " of the variance");
  out.n_selected = n;
  out.scores = p.scores.leftCols(n);
  out.loadings = p.loadings.leftCols(n);
  return out;
}

PcCorrelations pc_feature_correlations(const Matrix& scores, const Matrix& features,
                                       const std::vector<std::string>& names, const std::vector<std::string>& sources,
                                       Diagnostics* diag) {
  if (scores.rows() != features.rows())
    throw Error(ErrorCode::ShapeMismatch, "scores and features have different row counts");
  if (static_cast<Index>(names.size()) != features.cols() ||
      (!sources.empty() && static_cast<Index>(sources.size()) != features.cols()))
    throw Error(ErrorCode::ShapeMismatch, "feature names do not match the feature columns");
  PcCorrelations out;
  out.feature_names = names;
  out.feature_sources = sources.empty() ? std::vector<std::string>(names.size(), "feature") : sources;
  out.r = Matrix::Zero(scores.cols(), features.cols());
  std::vector<bool> warned(static_cast<std::size_t>(features.cols()), false);
  for (Index k = 0; k < scores.cols(); ++k) {
    for (Index f = 0; f < features.cols(); ++f) {
      const auto r = linalg::pearson(scores.col(k), features.col(f));
      if (r) {
        out.r(k, f) = *r;
      } else if (!warned[static_cast<std::size_t>(f)]) {
        warned[static_cast<std::size_t>(f)] = true;
        warn(diag, "correlation with '" + names[static_cast<std::size_t>(f)] + "' undefined (constant column); using 0");
      }
    }
    std::vector<RankedCorrelation> ranked;
    for (Index f = 0; f < features.cols(); ++f)
      ranked.push_back({static_cast<std::size_t>(f), names[static_cast<std::size_t>(f)],
                        out.feature_sources[static_cast<std::size_t>(f)], out.r(k, f)});
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedCorrelation& a, const RankedCorrelation& b) { return std::abs(a.r) > std::abs(b.r); });
    out.ranked.push_back(std::move(ranked));
  }
  return out;
}

PcRegression pc_outcome_regression(const Matrix& scores, const Vector& y, Diagnostics* diag) {
  if (scores.cols() < 1) throw Error(ErrorCode::InvalidArgument, "no principal components to regress on");
  if (scores.cols() == 1) warn(diag, "outcome regression on a single principal component");
  const baselines::OlsFit fit = baselines::ols_fit(scores, y);
  return {fit.coefficients, fit.r2};
}

ResidualStats residual_diagnostics(const Vector& yhat, const Vector& y, const Mask& mask, int bins) {
  if (yhat.size() != y.size() || (!mask.empty() && mask.size() != static_cast<std::size_t>(y.size())))
    throw Error(ErrorCode::ShapeMismatch, "residuals: prediction, target and mask sizes differ");
  if (bins < 1) throw Error(ErrorCode::InvalidArgument, "need at least one histogram bin");
  ResidualStats s;
  s.residuals = Vector::Constant(y.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<double> r;
  for (Index i = 0; i < y.size(); ++i)
    if (mask.empty() || mask[static_cast<std::size_t>(i)]) {
      s.residuals(i) = y(i) - yhat(i);
      r.push_back(s.residuals(i));
    }
  if (r.empty()) throw Error(ErrorCode::EmptyMask, "residual mask selects no node");
  for (double v : r) s.mean += v;
  s.mean /= static_cast<double>(r.size());
  double ss = 0.0;
  for (double v : r) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(r.size()));

  double lo = *std::min_element(r.begin(), r.end());
  double hi = *std::max_element(r.begin(), r.end());
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  for (int b = 0; b <= bins; ++b) s.bin_edges.push_back(b == bins ? hi : lo + width * b);
  s.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : r) {
    auto b = static_cast<std::size_t>(std::floor((v - lo) / width));
    b = std::min(b, static_cast<std::size_t>(bins - 1));
    ++s.counts[b];
  }
  return s;
}

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json ring_json(const Ring& ring) {
  json out = json::array();
  for (const Point& p : ring) out.push_back({p.x, p.y});
  return out;
}

}  // namespace

GeoLayers export_geo_layers(const RegionGraph& graph, const Matrix& scores, const Vector& yhat, const Vector& y,
                            const Mask& mask, Diagnostics* diag) {
  const auto n = static_cast<Index>(graph.size());
  if (scores.rows() != n || yhat.size() != n || y.size() != n || (!mask.empty() && mask.size() != graph.size()))
    throw Error(ErrorCode::ShapeMismatch, "geo layers: inputs not aligned with the graph");
  std::vector<std::string> header{"id"};
  for (Index k = 0; k < scores.cols(); ++k) header.push_back("pc" + std::to_string(k + 1));
  for (const char* h : {"residual", "yhat", "y", "missing"}) header.emplace_back(h);
  csv::Writer w(header);
  const bool boundaries = graph.has_boundaries();
  json features = json::array();
  for (Index i = 0; i < n; ++i) {
    const Region& reg = graph.region(i);
    const bool missing = !(mask.empty() || mask[static_cast<std::size_t>(i)]) || !std::isfinite(y(i));
    std::vector<std::string> row{reg.id};
    json props = {{"id", reg.id}};
    for (Index k = 0; k < scores.cols(); ++k) {
      row.push_back(csv::format_number(scores(i, k)));
      props["pc" + std::to_string(k + 1)] = number_or_null(scores(i, k));
    }
    if (missing) {
      row.insert(row.end(), {"", "", "", "true"});
      props["residual"] = nullptr;
      props["yhat"] = nullptr;
      props["y"] = nullptr;
    } else {
      row.insert(row.end(), {csv::format_number(y(i) - yhat(i)), csv::format_number(yhat(i)),
                             csv::format_number(y(i)), "false"});
      props["residual"] = y(i) - yhat(i);
      props["yhat"] = yhat(i);
      props["y"] = y(i);
    }
    props["missing"] = missing;
    w.row(row);
    if (boundaries) {
      json coords = json::array();
      for (const Ring& ring : *reg.boundary) coords.push_back(ring_json(ring));
      features.push_back({{"type", "Feature"},
                          {"id", reg.id},
                          {"properties", props},
                          {"geometry", {{"type", "Polygon"}, {"coordinates", coords}}}});
    }
  }
  GeoLayers out;
  out.csv = w.str();
  if (boundaries) out.geojson = json{{"type", "FeatureCollection"}, {"features", features}};
  else warn(diag, "regions have no boundaries; writing the CSV layer only");
  return out;
}

std::string correlations_csv(const PcCorrelations& c) {
  csv::Writer w({"pc", "feature", "source", "r", "rank"});
  for (std::size_t k = 0; k < c.ranked.size(); ++k)
    for (std::size_t j = 0; j < c.ranked[k].size(); ++j) {
      const auto& e = c.ranked[k][j];
      w.row({"pc" + std::to_string(k + 1), e.name, e.source, csv::format_number(e.r), std::to_string(j + 1)});
    }
  return w.str();
}

std::vector<std::pair<std::string, std::string>> render_report(const RegionGraph& graph, const ReportInputs& rep) {
  std::vector<std::pair<std::string, std::string>> files;
  {
    csv::Writer w({"component", "variance", "ratio", "cumulative", "selected"});
    double cum = 0.0;
    for (Index k = 0; k < rep.pca.ratios.size(); ++k) {
      cum += rep.pca.ratios(k);
      w.row({"pc" + std::to_string(k + 1), csv::format_number(rep.pca.variances(k)),
             csv::format_number(rep.pca.ratios(k)), csv::format_number(cum), k < rep.pca.n_selected ? "1" : "0"});
    }
    files.emplace_back("ratios.csv", w.str());
  }
  {
    std::vector<std::string> header{"id"};
    for (Index k = 0; k < rep.pca.scores.cols(); ++k) header.push_back("pc" + std::to_string(k + 1));
    csv::Writer w(header);
    for (Index i = 0; i < rep.pca.scores.rows(); ++i) {
      std::vector<std::string> row{graph.region(i).id};
      for (Index k = 0; k < rep.pca.scores.cols(); ++k) row.push_back(csv::format_number(rep.pca.scores(i, k)));
      w.row(row);
    }
    files.emplace_back("scores.csv", w.str());
  }
  {
    std::vector<std::string> header{"dim"};
    for (Index k = 0; k < rep.pca.loadings.cols(); ++k) header.push_back("pc" + std::to_string(k + 1));
    csv::Writer w(header);
    for (Index d = 0; d < rep.pca.loadings.rows(); ++d) {
      std::vector<std::string> row{std::to_string(d)};
      for (Index k = 0; k < rep.pca.loadings.cols(); ++k) row.push_back(csv::format_number(rep.pca.loadings(d, k)));
      w.row(row);
    }
    files.emplace_back("loadings.csv", w.str());
  }
  files.emplace_back("correlations.csv", correlations_csv(rep.correlations));
  {
    json coef = json::array();
    for (Index k = 0; k < rep.regression.coefficients.size(); ++k) coef.push_back(rep.regression.coefficients(k));
    const json j = {{"coefficients", coef}, {"intercept_first", true}, {"r2", number_or_null(rep.regression.r2)}};
    files.emplace_back("pc_regression.json", j.dump(2) + "\n");
  }
  {
    csv::Writer w({"id", "residual", "abs_residual"});
    for (Index i = 0; i < rep.residuals.residuals.size(); ++i) {
      const double r = rep.residuals.residuals(i);
      if (!std::isfinite(r)) continue;
      w.row({graph.region(i).id, csv::format_number(r), csv::format_number(std::abs(r))});
    }
    std::string text = w.str();
    csv::Writer h({"bin", "lower", "upper", "count"});
    for (std::size_t b = 0; b < rep.residuals.counts.size(); ++b)
      h.row({std::to_string(b), csv::format_number(rep.residuals.bin_edges[b]),
             csv::format_number(rep.residuals.bin_edges[b + 1]), std::to_string(rep.residuals.counts[b])});
    files.emplace_back("residuals.csv", text);
    files.emplace_back("residual_histogram.csv", h.str());
    const json stats = {{"mean", rep.residuals.mean}, {"std", rep.residuals.std}};
    files.emplace_back("residual_stats.json", stats.dump(2) + "\n");
  }
  files.emplace_back("layers.csv", rep.layers.csv);
  if (rep.layers.geojson) files.emplace_back("layers.geojson", rep.layers.geojson->dump(1) + "\n");
  return files;
}

void write_report(const std::filesystem::path& dir, const RegionGraph& graph, const ReportInputs& report) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, content] : render_report(graph, report)) csv::write_text_atomic(dir / name, content);
}

}  // namespace geohealth::explain
