#include "geohealth/encodings.hpp"

#include <cmath>
#include <numbers>
#include <unordered_map>

#include "geohealth/csv.hpp"
#include "geohealth/linalg.hpp"

namespace geohealth {

std::string_view to_string(EncodingKind kind) {
  switch (kind) {
    case EncodingKind::laplacian_spectral: return "laplacian";
    case EncodingKind::laplacian_smooth: return "laplacian_smooth";
    case EncodingKind::random_walk: return "random_walk";
    case EncodingKind::location: return "location";
  }
  return "unknown";
}

EncodingKind encoding_kind_from_string(std::string_view name) {
  if (name == "laplacian" || name == "laplacian_spectral") return EncodingKind::laplacian_spectral;
  if (name == "laplacian_smooth") return EncodingKind::laplacian_smooth;
  if (name == "random_walk" || name == "rw") return EncodingKind::random_walk;
  if (name == "location" || name == "satclip") return EncodingKind::location;
  throw Error(ErrorCode::InvalidConfig, "unknown encoding '" + std::string(name) + "'");
}

Matrix normalized_laplacian(const RegionGraph& graph) {
  const auto n = static_cast<Index>(graph.size());
  Vector inv_sqrt_deg(n);
  for (Index i = 0; i < n; ++i) {
    const auto d = static_cast<double>(graph.degree(i));
    inv_sqrt_deg(i) = d > 0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  Matrix lap = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    if (graph.degree(i) == 0) continue;
    lap(i, i) = 1.0;
    for (Index j : graph.neighbors(i)) lap(i, j) = -inv_sqrt_deg(i) * inv_sqrt_deg(j);
  }
  return lap;
}

SpectralEncoding laplacian_spectral_pe(const RegionGraph& graph, int dim) {
  const auto n = static_cast<Index>(graph.size());
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "encoding dimension must be positive");
  if (dim >= n) throw Error(ErrorCode::DimTooLarge, "dimension " + std::to_string(dim) + " needs more than " +
                                                       std::to_string(n) + " nodes");
  if (graph.edge_count() == 0) throw Error(ErrorCode::DimTooLarge, "graph has no edges, no nontrivial eigenpairs");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(normalized_laplacian(graph));
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::NonConvergence, "Laplacian eigensolver failed");

  std::vector<Index> picked;
  for (Index k = 0; k < n && static_cast<int>(picked.size()) < dim; ++k)
    if (solver.eigenvalues()(k) >= 1e-10) picked.push_back(k);
  if (static_cast<int>(picked.size()) < dim)
    throw Error(ErrorCode::DimTooLarge, "only " + std::to_string(picked.size()) + " nontrivial eigenpairs exist");

  SpectralEncoding out;
  out.encoding.kind = EncodingKind::laplacian_spectral;
  out.encoding.values.resize(n, dim);
  out.eigenvalues.resize(dim);
  for (int c = 0; c < dim; ++c) {
    Vector v = solver.eigenvectors().col(picked[static_cast<std::size_t>(c)]);
    for (Index i = 0; i < n; ++i)
      if (graph.degree(i) == 0) v(i) = 0.0;
    linalg::fix_sign(v);
    out.encoding.values.col(c) = v;
    out.eigenvalues(c) = solver.eigenvalues()(picked[static_cast<std::size_t>(c)]);
  }
  return out;
}

NodeEncoding laplacian_smooth(const RegionGraph& graph, const Matrix& features, double lambda) {
  const auto n = static_cast<Index>(graph.size());
  if (features.rows() != n)
    throw Error(ErrorCode::ShapeMismatch, "feature rows " + std::to_string(features.rows()) + " != nodes " +
                                              std::to_string(n));
  NodeEncoding out;
  out.kind = EncodingKind::laplacian_smooth;
  out.values = Matrix::Zero(n, features.cols());
  for (Index i = 0; i < n; ++i) {
    for (Index j : graph.neighbors(i)) out.values.row(i) += features.row(j) + lambda * features.row(i);
  }
  return out;
}

NodeEncoding random_walk_pe(const RegionGraph& graph, int steps) {
  if (steps < 1) throw Error(ErrorCode::InvalidArgument, "random walk steps must be >= 1");
  const auto n = static_cast<Index>(graph.size());
  NodeEncoding out;
  out.kind = EncodingKind::random_walk;
  out.values = Matrix::Zero(n, steps);

  // Propagate the walk distribution from each start node; the support of a
  // t-step walk is its t-hop ball, so scratch vectors stay small on spatial graphs.
  std::vector<double> current(graph.size(), 0.0);
  std::vector<double> next(graph.size(), 0.0);
  std::vector<Index> support;
  std::vector<Index> next_support;
  std::vector<bool> in_next(graph.size(), false);
  for (Index s = 0; s < n; ++s) {
    if (graph.degree(s) == 0) continue;
    support.assign(1, s);
    current[static_cast<std::size_t>(s)] = 1.0;
    for (int t = 1; t <= steps; ++t) {
      next_support.clear();
      for (Index v : support) {
        const double mass = current[static_cast<std::size_t>(v)];
        current[static_cast<std::size_t>(v)] = 0.0;
        if (mass == 0.0) continue;
        const double share = mass / static_cast<double>(graph.degree(v));
        for (Index w : graph.neighbors(v)) {
          next[static_cast<std::size_t>(w)] += share;
          if (!in_next[static_cast<std::size_t>(w)]) {
            in_next[static_cast<std::size_t>(w)] = true;
            next_support.push_back(w);
          }
        }
      }
      out.values(s, t - 1) = next[static_cast<std::size_t>(s)];
      for (Index w : next_support) {
        current[static_cast<std::size_t>(w)] = next[static_cast<std::size_t>(w)];
        next[static_cast<std::size_t>(w)] = 0.0;
        in_next[static_cast<std::size_t>(w)] = false;
      }
      std::swap(support, next_support);
    }
    for (Index v : support) current[static_cast<std::size_t>(v)] = 0.0;
  }
  return out;
}

NodeEncoding load_location_embeddings(const std::filesystem::path& path, const RegionGraph& graph) {
  const csv::Table t = csv::read(path);
  if (t.header.empty() || t.header[0] != "id")
    throw Error(ErrorCode::MissingColumn, path.string() + ": first column must be 'id'");
  const auto width = static_cast<Index>(t.header.size() - 1);
  if (width < 1) throw Error(ErrorCode::RaggedRows, path.string() + " has no embedding columns");

  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < t.rows.size(); ++r) row_of.emplace(t.rows[r][0], r);

  const auto n = static_cast<Index>(graph.size());
  NodeEncoding out;
  out.kind = EncodingKind::location;
  out.values.resize(n, width);
  for (Index i = 0; i < n; ++i) {
    const std::string& id = graph.region(i).id;
    auto it = row_of.find(id);
    if (it == row_of.end()) throw Error(ErrorCode::MissingRegion, path.string() + " has no embedding for '" + id + "'");
    const auto& row = t.rows[it->second];
    for (Index c = 0; c < width; ++c) {
      const auto v = csv::parse_number(row[static_cast<std::size_t>(c + 1)], false);
      if (!v)
        throw Error(ErrorCode::NonNumericCell, path.string() + " region '" + id + "' column " + std::to_string(c + 1));
      out.values(i, c) = *v;
    }
  }
  return out;
}

NodeEncoding fallback_coordinate_encoding(const RegionGraph& graph, int frequencies) {
  if (frequencies < 1) throw Error(ErrorCode::InvalidArgument, "frequencies must be >= 1");
  const auto n = static_cast<Index>(graph.size());
  NodeEncoding out;
  out.kind = EncodingKind::location;
  out.values.resize(n, 4 * frequencies);
  if (n == 0) return out;

  double min_x = graph.region(0).centroid.x, max_x = min_x;
  double min_y = graph.region(0).centroid.y, max_y = min_y;
  for (const Region& r : graph.regions()) {
    min_x = std::min(min_x, r.centroid.x);
    max_x = std::max(max_x, r.centroid.x);
    min_y = std::min(min_y, r.centroid.y);
    max_y = std::max(max_y, r.centroid.y);
  }
  auto normalise = [](double v, double lo, double hi) { return hi > lo ? (v - lo) / (hi - lo) : 0.0; };
  for (Index i = 0; i < n; ++i) {
    const double x = normalise(graph.region(i).centroid.x, min_x, max_x);
    const double y = normalise(graph.region(i).centroid.y, min_y, max_y);
    for (int k = 0; k < frequencies; ++k) {
      const double w = std::ldexp(std::numbers::pi, k);
      out.values(i, 4 * k + 0) = std::sin(w * x);
      out.values(i, 4 * k + 1) = std::cos(w * x);
      out.values(i, 4 * k + 2) = std::sin(w * y);
      out.values(i, 4 * k + 3) = std::cos(w * y);
    }
  }
  return out;
}

NodeEncoding pca_reduce(const NodeEncoding& encoding, int k) {
  if (k < 1 || k > encoding.dim())
    throw Error(ErrorCode::KTooLarge, "cannot keep " + std::to_string(k) + " of " + std::to_string(encoding.dim()) +
                                          " components");
  const linalg::Pca p = linalg::pca(encoding.values);
  NodeEncoding out;
  out.kind = encoding.kind;
  out.values = p.scores.leftCols(k);
  out.explained_ratios = p.ratios.head(k);
  return out;
}

std::vector<std::string> encoding_column_names(const NodeEncoding& encoding) {
  std::vector<std::string> names;
  for (Index t = 1; t <= encoding.dim(); ++t) names.push_back(std::string(to_string(encoding.kind)) + "_" + std::to_string(t));
  return names;
}

AssembledFeatures assemble_features(const FeatureTable& base, const std::vector<NodeEncoding>& encodings) {
  const auto n = static_cast<Index>(base.rows());
  Index width = base.values.cols();
  for (const auto& e : encodings) {
    if (e.rows() != n)
      throw Error(ErrorCode::ShapeMismatch, std::string(to_string(e.kind)) + " encoding has " +
                                                std::to_string(e.rows()) + " rows, features have " + std::to_string(n));
    width += e.dim();
  }
  AssembledFeatures out;
  out.values.resize(n, width);
  out.values.leftCols(base.values.cols()) = base.values;
  out.column_names = base.column_names();
  out.provenance.push_back({"features", 0, base.values.cols()});
  Index at = base.values.cols();
  for (const auto& e : encodings) {
    out.values.middleCols(at, e.dim()) = e.values;
    auto names = encoding_column_names(e);
    out.column_names.insert(out.column_names.end(), names.begin(), names.end());
    out.provenance.push_back({std::string(to_string(e.kind)), at, at + e.dim()});
    at += e.dim();
  }
  return out;
}

std::string encoding_csv(const NodeEncoding& encoding, const RegionGraph& graph) {
  std::vector<std::string> header{"id"};
  auto names = encoding_column_names(encoding);
  header.insert(header.end(), names.begin(), names.end());
  csv::Writer w(header);
  for (Index i = 0; i < encoding.rows(); ++i) {
    std::vector<std::string> row{graph.region(i).id};
    for (Index c = 0; c < encoding.dim(); ++c) row.push_back(csv::format_number(encoding.values(i, c)));
    w.row(row);
  }
  return w.str();
}

}  // namespace geohealth
