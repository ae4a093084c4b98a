#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geohealth/geo_graph.hpp"

namespace geohealth::io {

/// GeoJSON FeatureCollection with Polygon, MultiPolygon or Point geometries.
/// `properties.id` (or the feature id) names the region, `properties.group`
/// is optional.
std::vector<Region> regions_from_geojson(const nlohmann::json& doc);

/// CSV with columns id, x, y and optional group.
std::vector<Region> regions_from_csv(const std::filesystem::path& path);

/// Dispatches on extension: .csv, otherwise GeoJSON.
std::vector<Region> load_regions(const std::filesystem::path& path);

std::string regions_to_csv(const std::vector<Region>& regions);
nlohmann::json regions_to_geojson(const std::vector<Region>& regions);

/// Undirected edges once each, "src,dst" with region ids.
std::string edge_list_csv(const RegionGraph& graph);

/// Reads a "src,dst" edge list over the given regions. Unknown ids raise MissingRegion.
RegionGraph load_graph(std::vector<Region> regions, const std::filesystem::path& edge_list);

}  // namespace geohealth::io
