#include "geohealth/synth.hpp"

#include <cmath>

#include "geohealth/csv.hpp"
#include "geohealth/geo_io.hpp"
#include "geohealth/linalg.hpp"
#include "geohealth/rng.hpp"

namespace geohealth::synth {

using nlohmann::json;

void SynthConfig::validate() const {
  if (grid_rows < 1 || grid_cols < 1) throw Error(ErrorCode::InvalidConfig, "grid dimensions must be positive");
  if (n_features < 1) throw Error(ErrorCode::InvalidConfig, "n_features must be positive");
  if (smoothing_passes < 0) throw Error(ErrorCode::InvalidConfig, "smoothing_passes must be >= 0");
  if (!(outcome.rho > -1.0 && outcome.rho < 1.0)) throw Error(ErrorCode::InvalidConfig, "rho must lie in (-1, 1)");
  if (!(outcome.noise_std >= 0.0)) throw Error(ErrorCode::InvalidConfig, "noise_std must be >= 0");
  if (static_cast<int>(outcome.beta.size()) > n_features)
    throw Error(ErrorCode::InvalidConfig, "beta has more entries than features");
  for (const auto& p : collinear_pairs) {
    if (p.source < 0 || p.source >= n_features)
      throw Error(ErrorCode::InvalidConfig, "collinear source " + std::to_string(p.source) + " out of range");
    if (!(p.noise_std >= 0.0)) throw Error(ErrorCode::InvalidConfig, "collinear noise_std must be >= 0");
  }
}

json config_to_json(const SynthConfig& c) {
  json pairs = json::array();
  for (const auto& p : c.collinear_pairs) pairs.push_back({{"source", p.source}, {"noise_std", p.noise_std}});
  return {{"grid_rows", c.grid_rows},
          {"grid_cols", c.grid_cols},
          {"n_features", c.n_features},
          {"smoothing_passes", c.smoothing_passes},
          {"collinear_pairs", pairs},
          {"outcome",
           {{"beta", c.outcome.beta},
            {"rho", c.outcome.rho},
            {"nonlinear", c.outcome.nonlinear},
            {"noise_std", c.outcome.noise_std}}},
          {"seed", c.seed}};
}

SynthConfig config_from_json(const json& j) {
  SynthConfig c;
  try {
    c.grid_rows = j.value("grid_rows", c.grid_rows);
    c.grid_cols = j.value("grid_cols", c.grid_cols);
    c.n_features = j.value("n_features", c.n_features);
    c.smoothing_passes = j.value("smoothing_passes", c.smoothing_passes);
    c.seed = j.value("seed", c.seed);
    if (j.contains("collinear_pairs"))
      for (const auto& p : j.at("collinear_pairs"))
        c.collinear_pairs.push_back({p.at("source").get<int>(), p.value("noise_std", 0.001)});
    if (j.contains("outcome")) {
      const json& o = j.at("outcome");
      c.outcome.beta = o.value("beta", c.outcome.beta);
      c.outcome.rho = o.value("rho", c.outcome.rho);
      c.outcome.nonlinear = o.value("nonlinear", c.outcome.nonlinear);
      c.outcome.noise_std = o.value("noise_std", c.outcome.noise_std);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("bad synth config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

std::string quadrant(double x, double y) {
  if (x >= 0.5) return y >= 0.5 ? "Q1" : "Q4";
  return y >= 0.5 ? "Q2" : "Q3";
}

void standardize_columns(Matrix& m) {
  for (Index c = 0; c < m.cols(); ++c) {
    const double mean = m.col(c).mean();
    m.col(c).array() -= mean;
    const double sd = std::sqrt(m.col(c).squaredNorm() / static_cast<double>(m.rows()));
    if (sd > 0) m.col(c) /= sd;
  }
}

Vector lag(const RegionGraph& g, const Vector& v) {
  Vector out = Vector::Zero(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const auto nb = g.neighbors(i);
    if (nb.empty()) continue;
    for (Index j : nb) out(i) += v(j);
    out(i) /= static_cast<double>(nb.size());
  }
  return out;
}

}  // namespace

SynthData generate(const SynthConfig& config) {
  config.validate();
  const int rows = config.grid_rows, cols = config.grid_cols;
  SynthData d;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const double x0 = static_cast<double>(c) / cols, x1 = static_cast<double>(c + 1) / cols;
      const double y0 = static_cast<double>(r) / rows, y1 = static_cast<double>(r + 1) / rows;
      Region reg;
      reg.id = "r" + std::to_string(r) + "c" + std::to_string(c);
      reg.boundary = std::vector<Ring>{Ring{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}}};
      reg.centroid = {(x0 + x1) / 2, (y0 + y1) / 2};
      reg.group = quadrant(reg.centroid.x, reg.centroid.y);
      d.regions.push_back(std::move(reg));
    }
  d.graph = build_contiguity_graph(d.regions);
  const auto n = static_cast<Index>(d.regions.size());

  Rng rng(config.seed);
  Matrix base(n, config.n_features);
  for (Index c = 0; c < base.cols(); ++c)
    for (Index i = 0; i < n; ++i) base(i, c) = rng.normal();
  for (int pass = 0; pass < config.smoothing_passes; ++pass) {
    Matrix next(n, base.cols());
    for (Index i = 0; i < n; ++i) {
      RowVector acc = base.row(i);
      for (Index j : d.graph.neighbors(i)) acc += base.row(j);
      next.row(i) = acc / static_cast<double>(d.graph.degree(i) + 1);
    }
    base = std::move(next);
  }
  standardize_columns(base);

  const auto extra = static_cast<Index>(config.collinear_pairs.size());
  Matrix all(n, base.cols() + extra);
  all.leftCols(base.cols()) = base;
  std::vector<std::string> names;
  for (int f = 0; f < config.n_features; ++f) names.push_back("f" + std::to_string(f));
  for (Index k = 0; k < extra; ++k) {
    const CollinearPair& p = config.collinear_pairs[static_cast<std::size_t>(k)];
    for (Index i = 0; i < n; ++i) all(i, base.cols() + k) = base(i, p.source) + p.noise_std * rng.normal();
    names.push_back("f" + std::to_string(p.source) + "_copy" + std::to_string(k));
  }

  Vector beta = Vector::Zero(config.n_features);
  for (std::size_t k = 0; k < config.outcome.beta.size(); ++k) beta(static_cast<Index>(k)) = config.outcome.beta[k];
  const Vector xb = base * beta;
  d.signal = xb + config.outcome.rho * lag(d.graph, xb);
  if (config.outcome.nonlinear) d.signal += base.col(0).cwiseProduct(base.col(0));
  Vector y = d.signal;
  for (Index i = 0; i < n; ++i) y(i) += config.outcome.noise_std * rng.normal();

  d.features.region_ids.reserve(static_cast<std::size_t>(n));
  for (const Region& r : d.regions) d.features.region_ids.push_back(r.id);
  for (const auto& name : names) d.features.columns.push_back({name, false});
  d.features.values = all;
  d.features.valid.assign(static_cast<std::size_t>(n), true);
  d.target.outcome_name = "outcome";
  d.target.values = y;
  d.target.mask.assign(static_cast<std::size_t>(n), true);

  json collinear = json::array();
  for (std::size_t k = 0; k < config.collinear_pairs.size(); ++k)
    collinear.push_back({{"column", names[static_cast<std::size_t>(config.n_features) + k]},
                         {"source", "f" + std::to_string(config.collinear_pairs[k].source)},
                         {"noise_std", config.collinear_pairs[k].noise_std}});
  std::vector<double> b(beta.data(), beta.data() + beta.size());
  d.ground_truth = {{"beta", b},
                    {"rho", config.outcome.rho},
                    {"nonlinear", config.outcome.nonlinear},
                    {"noise_std", config.outcome.noise_std},
                    {"collinear", collinear},
                    {"outcome", d.target.outcome_name},
                    {"weights", "row-standardised queen contiguity"},
                    {"seed", config.seed}};
  return d;
}

std::vector<std::pair<std::string, std::string>> render(const SynthData& data, const SynthConfig& config) {
  csv::Writer t({"id", data.target.outcome_name});
  for (std::size_t i = 0; i < data.features.region_ids.size(); ++i)
    t.row({data.features.region_ids[i], csv::format_number(data.target.values(static_cast<Index>(i)))});
  return {{"regions.geojson", io::regions_to_geojson(data.regions).dump(1) + "\n"},
          {"features.csv", feature_table_csv(data.features)},
          {"targets.csv", t.str()},
          {"ground_truth.json", data.ground_truth.dump(2) + "\n"},
          {"config.json", config_to_json(config).dump(2) + "\n"}};
}

std::vector<std::filesystem::path> write(const SynthData& data, const SynthConfig& config,
                                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> out;
  for (const auto& [name, content] : render(data, config)) {
    out.push_back(dir / name);
    csv::write_text_atomic(out.back(), content);
  }
  return out;
}

double neighbor_correlation(const RegionGraph& graph, const Vector& values) {
  const Vector l = lag(graph, values);
  return linalg::pearson(values, l).value_or(0.0);
}

}  // namespace geohealth::synth
