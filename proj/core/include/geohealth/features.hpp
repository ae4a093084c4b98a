#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "geohealth/error.hpp"
#include "geohealth/types.hpp"

namespace geohealth {

struct FeatureColumn {
  std::string name;
  bool fixed = false;  ///< control variable, never removed by VIF selection
};

/// Per-region feature matrix. Rows follow graph region order; missing
/// cells are stored as 0 and their row is cleared in `valid`.
struct FeatureTable {
  std::vector<std::string> region_ids;
  std::vector<FeatureColumn> columns;
  Matrix values;
  Mask valid;
  bool standardized = false;
  Vector column_means;
  Vector column_stds;

  std::size_t rows() const noexcept { return region_ids.size(); }
  std::size_t cols() const noexcept { return columns.size(); }
  std::vector<std::string> column_names() const;
  std::optional<std::size_t> column_index(const std::string& name) const;
  /// Rows of `values` with valid == true.
  Matrix valid_rows() const;
};

struct TargetVector {
  std::string outcome_name;
  Vector values;
  Mask mask;  ///< observed entries
};

/// Plain-text list, one name per line; blank lines and '#' comments ignored.
std::set<std::string> read_name_list(const std::filesystem::path& path);

/// Reads "id,<feature>..." and aligns rows to `region_order` when given
/// (RegionIdMismatch if the id sets differ). Non-numeric cells raise
/// NonNumericCell; NaN / empty cells mask the row with a warning.
FeatureTable load_feature_table(const std::filesystem::path& path, const std::set<std::string>& fixed_columns,
                                const std::vector<std::string>* region_order = nullptr,
                                Diagnostics* diag = nullptr);

/// Reads one outcome column from "id,<outcome>..." aligned to `region_order`.
/// Regions absent from the file or with missing cells are masked out.
TargetVector load_target(const std::filesystem::path& path, const std::string& outcome,
                         const std::vector<std::string>& region_order, Diagnostics* diag = nullptr);

FeatureTable select_columns(const FeatureTable& table, const std::vector<std::size_t>& columns);

/// Pearson correlation over valid rows. Unit diagonal; a constant column has
/// zero off-diagonal entries and triggers a warning.
Matrix correlation_matrix(const FeatureTable& table, Diagnostics* diag = nullptr);

/// Sentinel returned by `vif` for perfectly collinear columns.
inline constexpr double kInfiniteVif = std::numeric_limits<double>::infinity();

/// 1 / (1 - R^2) of column `column` regressed (with intercept) on the other
/// columns in `among`, over valid rows. An empty `among` means all columns.
/// Returns kInfiniteVif when R^2 >= 1 - 1e-12 or the column is constant.
double vif(const FeatureTable& table, std::size_t column, const std::vector<std::size_t>& among = {});

struct VifRemoval {
  int iteration = 0;
  std::string column;
  double vif = 0.0;
};

struct VifViolation {
  std::string column;
  double vif = 0.0;
};

struct VifSelection {
  std::vector<std::size_t> retained;  ///< header order
  std::vector<VifRemoval> removals;
  std::vector<VifViolation> violations;  ///< fixed columns at or above the fixed threshold
  std::vector<double> final_vif;         ///< aligned with `retained`
};

/// Relative band within which VIFs count as tied.
inline constexpr double kVifTieTolerance = 0.01;

/// Iterative removal: while some free column has VIF > threshold_free, drop
/// the free column with the largest VIF and recompute. VIFs within
/// kVifTieTolerance of the largest are ties, won by the later header column,
/// so of a near-duplicate pair the appended copy goes. Fixed columns are
/// never dropped.
VifSelection vif_select(const FeatureTable& table, double threshold_free = 1000.0, double threshold_fixed = 1500.0);

std::string removal_log_csv(const VifSelection& selection);
std::string violations_csv(const VifSelection& selection);

/// z-scores each column with the mean and population std of the valid rows;
/// every row is transformed. Constant columns become zeros with a warning and
/// record std 0.
FeatureTable standardize(const FeatureTable& table, Diagnostics* diag = nullptr);

/// Undoes `standardize` using the recorded means and stds.
Matrix destandardize(const FeatureTable& table);

std::string feature_table_csv(const FeatureTable& table);

}  // namespace geohealth
