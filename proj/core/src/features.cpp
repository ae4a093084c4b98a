#include "geohealth/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "geohealth/csv.hpp"
#include "geohealth/linalg.hpp"

namespace geohealth {

namespace fs = std::filesystem;

std::vector<std::string> FeatureTable::column_names() const {
  std::vector<std::string> names;
  names.reserve(columns.size());
  for (const auto& c : columns) names.push_back(c.name);
  return names;
}

std::optional<std::size_t> FeatureTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return i;
  return std::nullopt;
}

Matrix FeatureTable::valid_rows() const {
  const NodeSet rows_kept = nodes_from(valid);
  Matrix out(static_cast<Index>(rows_kept.size()), values.cols());
  for (std::size_t k = 0; k < rows_kept.size(); ++k) out.row(static_cast<Index>(k)) = values.row(rows_kept[k]);
  return out;
}

std::set<std::string> read_name_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  std::set<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    line.erase(0, start);
    if (line.starts_with('#')) continue;
    names.insert(line);
  }
  return names;
}

namespace {

/// Maps each id in `order` to its row in the file; RegionIdMismatch when the sets differ.
std::vector<std::size_t> align_rows(const csv::Table& t, std::size_t c_id, const std::vector<std::string>& order,
                                    const fs::path& path, bool allow_missing) {
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    if (!row_of.emplace(t.rows[r][c_id], r).second)
      throw Error(ErrorCode::RegionIdMismatch, path.string() + ": duplicate id '" + t.rows[r][c_id] + "'");
  std::vector<std::size_t> rows(order.size(), SIZE_MAX);
  std::size_t matched = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto it = row_of.find(order[i]);
    if (it == row_of.end()) {
      if (!allow_missing) throw Error(ErrorCode::RegionIdMismatch, path.string() + " lacks region '" + order[i] + "'");
      continue;
    }
    rows[i] = it->second;
    ++matched;
  }
  if (!allow_missing && matched != t.rows.size())
    throw Error(ErrorCode::RegionIdMismatch,
                path.string() + " has " + std::to_string(t.rows.size() - matched) + " ids not in the region set");
  return rows;
}

}  // namespace

FeatureTable load_feature_table(const fs::path& path, const std::set<std::string>& fixed_columns,
                                const std::vector<std::string>* region_order, Diagnostics* diag) {
  const csv::Table t = csv::read(path);
  if (t.header.empty() || t.header[0] != "id")
    throw Error(ErrorCode::MissingColumn, path.string() + ": first column must be 'id'");
  for (const auto& name : fixed_columns)
    if (!t.find(name)) throw Error(ErrorCode::MissingColumn, "fixed column '" + name + "' not in " + path.string());

  FeatureTable table;
  for (std::size_t c = 1; c < t.header.size(); ++c)
    table.columns.push_back({t.header[c], fixed_columns.contains(t.header[c])});

  std::vector<std::size_t> rows;
  if (region_order != nullptr) {
    rows = align_rows(t, 0, *region_order, path, false);
    table.region_ids = *region_order;
  } else {
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      rows.push_back(r);
      table.region_ids.push_back(t.rows[r][0]);
    }
  }

  const auto n = static_cast<Index>(rows.size());
  const auto f = static_cast<Index>(table.columns.size());
  table.values = Matrix::Zero(n, f);
  table.valid.assign(rows.size(), true);
  for (Index i = 0; i < n; ++i) {
    const auto& row = t.rows[rows[static_cast<std::size_t>(i)]];
    for (Index c = 0; c < f; ++c) {
      const std::string& cell = row[static_cast<std::size_t>(c + 1)];
      const auto v = csv::parse_number(cell, true);
      if (!v)
        throw Error(ErrorCode::NonNumericCell, path.string() + " row " + std::to_string(rows[static_cast<std::size_t>(i)] + 2) +
                                                   " column '" + table.columns[static_cast<std::size_t>(c)].name +
                                                   "': '" + cell + "'");
      if (!std::isfinite(*v)) {
        if (table.valid[static_cast<std::size_t>(i)])
          warn(diag, "region '" + table.region_ids[static_cast<std::size_t>(i)] + "' has a missing value in '" +
                         table.columns[static_cast<std::size_t>(c)].name + "'; masked out");
        table.valid[static_cast<std::size_t>(i)] = false;
        continue;
      }
      table.values(i, c) = *v;
    }
  }
  // masked rows keep zeros so the matrix stays finite
  for (Index i = 0; i < n; ++i)
    if (!table.valid[static_cast<std::size_t>(i)]) table.values.row(i).setZero();
  return table;
}

TargetVector load_target(const fs::path& path, const std::string& outcome, const std::vector<std::string>& region_order,
                         Diagnostics* diag) {
  const csv::Table t = csv::read(path);
  const std::size_t c_id = t.require("id", path);
  const std::size_t c_y = t.require(outcome, path);
  const std::vector<std::size_t> rows = align_rows(t, c_id, region_order, path, true);

  TargetVector target;
  target.outcome_name = outcome;
  target.values = Vector::Zero(static_cast<Index>(region_order.size()));
  target.mask.assign(region_order.size(), false);
  std::size_t missing = 0;
  for (std::size_t i = 0; i < region_order.size(); ++i) {
    if (rows[i] == SIZE_MAX) {
      ++missing;
      continue;
    }
    const std::string& cell = t.rows[rows[i]][c_y];
    const auto v = csv::parse_number(cell, true);
    if (!v)
      throw Error(ErrorCode::NonNumericCell, path.string() + " row " + std::to_string(rows[i] + 2) + " column '" +
                                                 outcome + "': '" + cell + "'");
    if (!std::isfinite(*v)) {
      ++missing;
      continue;
    }
    target.values(static_cast<Index>(i)) = *v;
    target.mask[i] = true;
  }
  if (missing > 0) warn(diag, std::to_string(missing) + " regions have no observed '" + outcome + "'");
  return target;
}

FeatureTable select_columns(const FeatureTable& table, const std::vector<std::size_t>& columns) {
  FeatureTable out;
  out.region_ids = table.region_ids;
  out.valid = table.valid;
  out.standardized = table.standardized;
  out.values.resize(table.values.rows(), static_cast<Index>(columns.size()));
  if (table.standardized) {
    out.column_means.resize(static_cast<Index>(columns.size()));
    out.column_stds.resize(static_cast<Index>(columns.size()));
  }
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const std::size_t c = columns[k];
    if (c >= table.cols()) throw Error(ErrorCode::InvalidArgument, "column index out of range");
    out.columns.push_back(table.columns[c]);
    out.values.col(static_cast<Index>(k)) = table.values.col(static_cast<Index>(c));
    if (table.standardized) {
      out.column_means(static_cast<Index>(k)) = table.column_means(static_cast<Index>(c));
      out.column_stds(static_cast<Index>(k)) = table.column_stds(static_cast<Index>(c));
    }
  }
  return out;
}

Matrix correlation_matrix(const FeatureTable& table, Diagnostics* diag) {
  const Matrix x = table.valid_rows();
  if (x.rows() < 2) throw Error(ErrorCode::TooFewRows, "correlation needs at least 2 valid rows");
  const Index f = x.cols();
  Matrix corr = Matrix::Identity(f, f);
  std::vector<bool> constant(static_cast<std::size_t>(f), false);
  for (Index a = 0; a < f; ++a) {
    if ((x.col(a).array() == x(0, a)).all()) {
      constant[static_cast<std::size_t>(a)] = true;
      warn(diag, "column '" + table.columns[static_cast<std::size_t>(a)].name + "' is constant");
    }
  }
  for (Index a = 0; a < f; ++a)
    for (Index b = a + 1; b < f; ++b) {
      double r = 0.0;
      if (!constant[static_cast<std::size_t>(a)] && !constant[static_cast<std::size_t>(b)])
        r = linalg::pearson(x.col(a), x.col(b)).value_or(0.0);
      corr(a, b) = corr(b, a) = r;
    }
  return corr;
}

double vif(const FeatureTable& table, std::size_t column, const std::vector<std::size_t>& among) {
  std::vector<std::size_t> others;
  if (among.empty()) {
    for (std::size_t c = 0; c < table.cols(); ++c)
      if (c != column) others.push_back(c);
  } else {
    for (std::size_t c : among)
      if (c != column) others.push_back(c);
  }
  if (column >= table.cols()) throw Error(ErrorCode::InvalidArgument, "vif: column out of range");

  const Matrix x = table.valid_rows();
  const Index n = x.rows();
  if (n < static_cast<Index>(others.size()) + 2)
    throw Error(ErrorCode::TooFewRows, "vif needs more valid rows (" + std::to_string(n) + ") than regressors (" +
                                           std::to_string(others.size() + 1) + ")");

  const Vector target = x.col(static_cast<Index>(column));
  const Vector centred = target.array() - target.mean();
  const double ss_tot = centred.squaredNorm();
  const double scale = std::max(1.0, target.cwiseAbs().maxCoeff());
  if (ss_tot <= 1e-24 * scale * scale * static_cast<double>(n)) return kInfiniteVif;
  if (others.empty()) return 1.0;

  // centring both sides absorbs the intercept
  Matrix design(n, static_cast<Index>(others.size()));
  for (std::size_t k = 0; k < others.size(); ++k) {
    const Vector col = x.col(static_cast<Index>(others[k]));
    design.col(static_cast<Index>(k)) = col.array() - col.mean();
  }
  const linalg::LeastSquares fit = linalg::least_squares(design, centred);
  const double r2 = 1.0 - fit.ss_res / ss_tot;
  if (r2 >= 1.0 - 1e-12) return kInfiniteVif;
  return 1.0 / (1.0 - r2);
}

VifSelection vif_select(const FeatureTable& table, double threshold_free, double threshold_fixed) {
  if (!(threshold_free > 1.0) || !(threshold_fixed > 1.0))
    throw Error(ErrorCode::InvalidArgument, "VIF thresholds must exceed 1");
  VifSelection out;
  for (std::size_t c = 0; c < table.cols(); ++c) out.retained.push_back(c);

  std::vector<double> current;
  for (int iteration = 1;; ++iteration) {
    current.assign(out.retained.size(), 0.0);
    for (std::size_t k = 0; k < out.retained.size(); ++k) current[k] = vif(table, out.retained[k], out.retained);

    auto candidate = [&](std::size_t k) {
      return !table.columns[out.retained[k]].fixed && current[k] > threshold_free;
    };
    double highest = 0.0;
    for (std::size_t k = 0; k < out.retained.size(); ++k)
      if (candidate(k)) highest = std::max(highest, current[k]);
    std::optional<std::size_t> worst;
    for (std::size_t k = 0; k < out.retained.size(); ++k)
      if (candidate(k) && current[k] >= highest * (1.0 - kVifTieTolerance)) worst = k;
    if (!worst) break;
    out.removals.push_back({iteration, table.columns[out.retained[*worst]].name, current[*worst]});
    out.retained.erase(out.retained.begin() + static_cast<std::ptrdiff_t>(*worst));
  }
  out.final_vif = current;
  for (std::size_t k = 0; k < out.retained.size(); ++k)
    if (table.columns[out.retained[k]].fixed && current[k] >= threshold_fixed)
      out.violations.push_back({table.columns[out.retained[k]].name, current[k]});
  return out;
}

std::string removal_log_csv(const VifSelection& selection) {
  csv::Writer w({"iteration", "column", "vif"});
  for (const auto& r : selection.removals) w.row({std::to_string(r.iteration), r.column, csv::format_number(r.vif)});
  return w.str();
}

std::string violations_csv(const VifSelection& selection) {
  csv::Writer w({"column", "vif"});
  for (const auto& v : selection.violations) w.row({v.column, csv::format_number(v.vif)});
  return w.str();
}

FeatureTable standardize(const FeatureTable& table, Diagnostics* diag) {
  if (table.standardized) throw Error(ErrorCode::AlreadyStandardized, "feature table is already standardized");
  FeatureTable out = table;
  const Index f = table.values.cols();
  out.column_means = Vector::Zero(f);
  out.column_stds = Vector::Zero(f);
  const NodeSet rows = nodes_from(table.valid);
  if (rows.empty()) throw Error(ErrorCode::TooFewRows, "standardize: no valid rows");
  const double n = static_cast<double>(rows.size());
  for (Index c = 0; c < f; ++c) {
    double mean = 0.0;
    for (Index r : rows) mean += table.values(r, c);
    mean /= n;
    double var = 0.0;
    for (Index r : rows) var += (table.values(r, c) - mean) * (table.values(r, c) - mean);
    const double sd = std::sqrt(var / n);
    out.column_means(c) = mean;
    const double scale = std::max(1.0, std::abs(mean));
    if (!(sd > 1e-12 * scale)) {
      warn(diag, "column '" + table.columns[static_cast<std::size_t>(c)].name + "' is constant; set to zero");
      out.values.col(c).setZero();
      continue;
    }
    out.column_stds(c) = sd;
    out.values.col(c) = ((table.values.col(c).array() - mean) / sd).matrix();
  }
  out.standardized = true;
  return out;
}

Matrix destandardize(const FeatureTable& table) {
  if (!table.standardized) return table.values;
  Matrix out = table.values;
  for (Index c = 0; c < out.cols(); ++c)
    out.col(c) = (out.col(c).array() * table.column_stds(c) + table.column_means(c)).matrix();
  return out;
}

std::string feature_table_csv(const FeatureTable& table) {
  std::vector<std::string> header{"id"};
  for (const auto& c : table.columns) header.push_back(c.name);
  csv::Writer w(header);
  for (std::size_t i = 0; i < table.rows(); ++i) {
    std::vector<std::string> row{table.region_ids[i]};
    for (Index c = 0; c < table.values.cols(); ++c)
      row.push_back(table.valid[i] ? csv::format_number(table.values(static_cast<Index>(i), c)) : "NaN");
    w.row(row);
  }
  return w.str();
}

}  // namespace geohealth
