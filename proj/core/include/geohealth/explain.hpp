#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "geohealth/error.hpp"
#include "geohealth/geo_graph.hpp"
#include "geohealth/nn/train.hpp"

namespace geohealth::explain {

/// Penultimate-layer activations in eval mode. UntrainedModel if the model
/// carries no training log.
Matrix extract_embeddings(const nn::TrainedModel& model, const nn::MessageGraph& graph, const Matrix& x);

struct PcaSelection {
  Vector ratios;     ///< every component, descending
  Vector variances;
  int n_selected = 0;
  Matrix scores;     ///< N x n_selected
  Matrix loadings;   ///< dim x n_selected
};

/// Smallest n whose cumulative ratio reaches `variance_target`.
/// DegenerateData if every row is identical; TooFewRows if N < 2.
PcaSelection pca_embeddings(const Matrix& embeddings, double variance_target = 0.80, Diagnostics* diag = nullptr);

struct RankedCorrelation {
  std::size_t feature = 0;
  std::string name;
  std::string source;
  double r = 0.0;
};

struct PcCorrelations {
  Matrix r;  ///< n_pcs x F
  std::vector<std::string> feature_names;
  std::vector<std::string> feature_sources;
  /// Per PC, features by descending |r| (feature order on ties).
  std::vector<std::vector<RankedCorrelation>> ranked;
};

/// Pearson r of every score column against every feature column; constant
/// columns give r = 0 and a warning. `sources` defaults to "feature".
PcCorrelations pc_feature_correlations(const Matrix& scores, const Matrix& features,
                                       const std::vector<std::string>& names,
                                       const std::vector<std::string>& sources = {}, Diagnostics* diag = nullptr);

struct PcRegression {
  Vector coefficients;  ///< intercept first
  double r2 = 0.0;
};

/// OLS of y on the score columns plus intercept. Warns with one PC.
PcRegression pc_outcome_regression(const Matrix& scores, const Vector& y, Diagnostics* diag = nullptr);

struct ResidualStats {
  double mean = 0.0;
  double std = 0.0;  ///< population
  std::vector<double> bin_edges;  ///< bins + 1
  std::vector<std::size_t> counts;
  Vector residuals;  ///< y - yhat, NaN outside the mask
};

/// Residual summary over masked nodes (empty mask = all); 30 equal-width
/// bins spanning [min, max] (a unit-wide bin around a constant value).
ResidualStats residual_diagnostics(const Vector& yhat, const Vector& y, const Mask& mask = {}, int bins = 30);

struct GeoLayers {
  std::string csv;
  std::optional<nlohmann::json> geojson;  ///< only when every region has a boundary
};

/// id, pc1..pcn, residual, yhat, y, missing. Regions outside `mask` are
/// flagged missing and carry null metric fields.
GeoLayers export_geo_layers(const RegionGraph& graph, const Matrix& scores, const Vector& yhat, const Vector& y,
                            const Mask& mask, Diagnostics* diag = nullptr);

struct ReportInputs {
  PcaSelection pca;
  PcCorrelations correlations;
  PcRegression regression;
  ResidualStats residuals;
  GeoLayers layers;
};

/// File name and content of every report artifact.
std::vector<std::pair<std::string, std::string>> render_report(const RegionGraph& graph, const ReportInputs& report);

/// Writes ratios.csv, scores.csv, loadings.csv, correlations.csv,
/// pc_regression.json, residuals.csv, residual_histogram.csv,
/// residual_stats.json, layers.csv and (with boundaries)
/// layers.geojson into `dir`.
void write_report(const std::filesystem::path& dir, const RegionGraph& graph, const ReportInputs& report);

std::string correlations_csv(const PcCorrelations& c);

}  // namespace geohealth::explain
