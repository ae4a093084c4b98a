#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "geohealth/features.hpp"
#include "geohealth/geo_graph.hpp"

namespace geohealth {

enum class EncodingKind { laplacian_spectral, laplacian_smooth, random_walk, location };

std::string_view to_string(EncodingKind kind);
EncodingKind encoding_kind_from_string(std::string_view name);

struct NodeEncoding {
  EncodingKind kind = EncodingKind::location;
  Matrix values;  ///< N x dim
  /// Explained-variance ratios when the encoding came out of `pca_reduce`.
  Vector explained_ratios;

  Index dim() const noexcept { return values.cols(); }
  Index rows() const noexcept { return values.rows(); }
};

/// Eigenvalues returned alongside the spectral encoding.
struct SpectralEncoding {
  NodeEncoding encoding;
  Vector eigenvalues;
};

/// Symmetric normalised Laplacian I - D^-1/2 A D^-1/2; isolated nodes get an
/// all-zero row and column.
Matrix normalized_laplacian(const RegionGraph& graph);

/// Eigenvectors for the `dim` smallest eigenvalues above 1e-10, each flipped
/// so its largest-magnitude entry is positive.
SpectralEncoding laplacian_spectral_pe(const RegionGraph& graph, int dim);

/// One smoothing pass: h_i = sum_{j in N(i)} (A_ij x_j + lambda x_i).
NodeEncoding laplacian_smooth(const RegionGraph& graph, const Matrix& features, double lambda = 1.0);

/// Column t-1 holds the t-step return probability [(D^-1 A)^t]_ii, t = 1..steps.
NodeEncoding random_walk_pe(const RegionGraph& graph, int steps = 1);

/// CSV "id,<c1>,<c2>..." aligned to graph order.
NodeEncoding load_location_embeddings(const std::filesystem::path& path, const RegionGraph& graph);

/// sin/cos of min-max normalised centroid coordinates at octaves 2^k * pi,
/// k = 0..frequencies-1; per octave the order is sin x, cos x, sin y, cos y.
NodeEncoding fallback_coordinate_encoding(const RegionGraph& graph, int frequencies);

/// Projection onto the top-k principal components of the centred encoding.
NodeEncoding pca_reduce(const NodeEncoding& encoding, int k);

struct ColumnSpan {
  std::string source;  ///< "features" or the encoding kind
  Index begin = 0;
  Index end = 0;
};

struct AssembledFeatures {
  Matrix values;
  std::vector<std::string> column_names;
  std::vector<ColumnSpan> provenance;
};

/// [base | enc_1 | enc_2 | ...] with a provenance span per block.
/// Encoding columns are named "<kind>_<t>", t starting at 1.
AssembledFeatures assemble_features(const FeatureTable& base, const std::vector<NodeEncoding>& encodings);

std::vector<std::string> encoding_column_names(const NodeEncoding& encoding);
std::string encoding_csv(const NodeEncoding& encoding, const RegionGraph& graph);

}  // namespace geohealth
