#include "geohealth/spatial_cv/ablation.hpp"

#include <cmath>

#include "geohealth/csv.hpp"
#include "geohealth/error.hpp"
#include "geohealth/nn/message_graph.hpp"
#include "geohealth/rng.hpp"

namespace geohealth::cv {

void AblationAxes::validate() const {
  if (architectures.empty() || graphs.empty() || depths.empty() || encodings.empty())
    throw Error(ErrorCode::InvalidConfig, "every ablation axis needs at least one option");
  for (int d : depths)
    if (d < 1) throw Error(ErrorCode::InvalidConfig, "ablation depths must be >= 1");
}

namespace {

struct Cell {
  std::size_t arch = 0, graph = 0, depth = 0, enc = 0;
};

}  // namespace

AblationResult ablation_grid(const Matrix& base, const Vector& y, const Mask& labelled, const AblationAxes& axes,
                             const nn::ModelSpec& base_spec, const nn::TrainConfig& base_config,
                             const AblationOptions& options) {
  axes.validate();
  const auto n = static_cast<Index>(labelled.size());
  if (base.rows() != n || y.size() != n) throw Error(ErrorCode::ShapeMismatch, "ablation inputs are not aligned");
  for (const auto& g : axes.graphs)
    if (static_cast<Index>(g.graph.size()) != n)
      throw Error(ErrorCode::ShapeMismatch, "graph option '" + g.name + "' has the wrong node count");
  for (const auto& e : axes.encodings)
    if (e.extra.cols() > 0 && e.extra.rows() != n)
      throw Error(ErrorCode::ShapeMismatch, "encoding option '" + e.name + "' has the wrong row count");

  std::vector<nn::MessageGraph> graphs;
  for (const auto& g : axes.graphs) graphs.push_back(nn::make_message_graph(g.graph));

  AblationResult result;
  std::uint64_t cell_counter = 0;
  auto evaluate = [&](const Cell& c, const std::string& axis, const std::string& option) {
    nn::ModelSpec spec = base_spec;
    spec.architecture = axes.architectures[c.arch];
    spec.depth = axes.depths[c.depth];
    const EncodingOption& enc = axes.encodings[c.enc];
    Matrix x(n, base.cols() + enc.extra.cols());
    x << base, enc.extra;
    const nn::MessageGraph& mg = graphs[c.graph];
    const std::uint64_t seed = derive_seed(options.seed, cell_counter++);
    const SearchResult sr = random_search(
        options.space, options.budget, seed,
        [&](const TrialConfig& t, int index) {
          return inner_validation_objective(apply(t, spec), apply(t, base_config), mg, x, y, labelled,
                                            derive_seed(seed, static_cast<std::uint64_t>(index)), options.resamples,
                                            options.val_fraction);
        },
        options.jobs);
    AblationRow row;
    row.axis = axis;
    row.option = option;
    row.architecture = std::string(nn::to_string(spec.architecture));
    row.graph = axes.graphs[c.graph].name;
    row.depth = spec.depth;
    row.encoding = enc.name;
    row.mean_val_r2 = sr.trials[static_cast<std::size_t>(sr.best_index)].objective;
    row.best_trial = sr.best;
    result.rows.push_back(row);
    return result.rows.size() - 1;
  };

  Cell current;
  auto sweep = [&](const std::string& axis, std::size_t options_count, std::size_t Cell::*field,
                   auto option_name) {
    std::size_t best_row = 0;
    std::size_t best_option = 0;
    bool have = false;
    for (std::size_t k = 0; k < options_count; ++k) {
      Cell c = current;
      c.*field = k;
      const std::size_t r = evaluate(c, axis, option_name(k));
      const double v = result.rows[r].mean_val_r2;
      if (!std::isnan(v) && (!have || v > result.rows[best_row].mean_val_r2)) {
        best_row = r;
        best_option = k;
        have = true;
      }
      if (!have && k == 0) best_row = r;
    }
    result.rows[best_row].winner = true;
    current.*field = best_option;
  };

  sweep("architecture", axes.architectures.size(), &Cell::arch,
        [&](std::size_t k) { return std::string(nn::to_string(axes.architectures[k])); });
  sweep("graph", axes.graphs.size(), &Cell::graph, [&](std::size_t k) { return axes.graphs[k].name; });
  sweep("depth", axes.depths.size(), &Cell::depth, [&](std::size_t k) { return std::to_string(axes.depths[k]); });
  sweep("encoding", axes.encodings.size(), &Cell::enc, [&](std::size_t k) { return axes.encodings[k].name; });

  result.best_architecture = std::string(nn::to_string(axes.architectures[current.arch]));
  result.best_graph = axes.graphs[current.graph].name;
  result.best_depth = axes.depths[current.depth];
  result.best_encoding = axes.encodings[current.enc].name;
  return result;
}

std::string ablation_csv(const AblationResult& result) {
  csv::Writer w({"axis", "option", "architecture", "graph", "depth", "encoding", "mean_val_r2", "winner"});
  for (const auto& r : result.rows)
    w.row({r.axis, r.option, r.architecture, r.graph, std::to_string(r.depth), r.encoding,
           csv::format_number(r.mean_val_r2), r.winner ? "1" : "0"});
  return w.str();
}

nlohmann::json ablation_json(const AblationResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : result.rows)
    rows.push_back({{"axis", r.axis},
                    {"option", r.option},
                    {"architecture", r.architecture},
                    {"graph", r.graph},
                    {"depth", r.depth},
                    {"encoding", r.encoding},
                    {"mean_val_r2", std::isfinite(r.mean_val_r2) ? nlohmann::json(r.mean_val_r2) : nlohmann::json()},
                    {"best_trial", trial_to_json(r.best_trial)},
                    {"winner", r.winner}});
  return {{"best",
           {{"architecture", result.best_architecture},
            {"graph", result.best_graph},
            {"depth", result.best_depth},
            {"encoding", result.best_encoding}}},
          {"rows", rows}};
}

}  // namespace geohealth::cv
