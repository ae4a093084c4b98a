#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace geohealth {

using Index = std::int64_t;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Sorted list of node indices.
using NodeSet = std::vector<Index>;

/// Boolean node mask of graph length.
using Mask = std::vector<bool>;

inline Mask mask_from(const NodeSet& nodes, std::size_t n) {
  Mask m(n, false);
  for (Index i : nodes) m[static_cast<std::size_t>(i)] = true;
  return m;
}

inline NodeSet nodes_from(const Mask& mask) {
  NodeSet out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.push_back(static_cast<Index>(i));
  return out;
}

inline std::size_t count(const Mask& mask) {
  std::size_t c = 0;
  for (bool b : mask) c += b ? 1 : 0;
  return c;
}

}  // namespace geohealth
