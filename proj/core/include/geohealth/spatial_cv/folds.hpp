#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geohealth/geo_graph.hpp"

namespace geohealth::cv {

/// Partitions V into `folds` connected-as-possible test sets whose sizes
/// differ by at most one, then buffers each with `hops`. Seeds are spread by
/// farthest-point BFS; sets grow round-robin by seeded BFS.
std::vector<FoldPlan> spatial_kfold_split(const RegionGraph& graph, int folds, std::uint64_t seed, int hops = 2,
                                          Diagnostics* diag = nullptr);

/// Ten folds; GraphTooSmall when N < 10.
std::vector<FoldPlan> tenfold_split(const RegionGraph& graph, std::uint64_t seed, int hops = 2,
                                    Diagnostics* diag = nullptr);

/// Test set = every node labelled `target_group`. Labels default to the
/// regions' group field.
FoldPlan loocv_region_split(const RegionGraph& graph, const std::vector<std::optional<std::string>>& group_labels,
                            const std::string& target_group, int hops = 2, int fold_id = 0);
FoldPlan loocv_region_split(const RegionGraph& graph, const std::string& target_group, int hops = 2,
                            int fold_id = 0);

std::vector<std::optional<std::string>> group_labels(const RegionGraph& graph);

/// Distinct labels in first-appearance order.
std::vector<std::string> distinct_groups(const std::vector<std::optional<std::string>>& labels);

}  // namespace geohealth::cv
