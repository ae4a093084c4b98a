#include "geohealth/geo_io.hpp"

#include "geohealth/csv.hpp"
#include "geohealth/error.hpp"

namespace geohealth::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string json_scalar_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return csv::format_number(v.get<double>());
  throw Error(ErrorCode::ParseError, "expected a string or number, got " + v.dump());
}

Ring parse_ring(const json& coords) {
  Ring ring;
  ring.reserve(coords.size());
  for (const json& p : coords) {
    if (!p.is_array() || p.size() < 2) throw Error(ErrorCode::ParseError, "malformed coordinate " + p.dump());
    ring.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return ring;
}

}  // namespace

std::vector<Region> regions_from_geojson(const json& doc) {
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features"))
    throw Error(ErrorCode::ParseError, "expected a GeoJSON FeatureCollection");
  std::vector<Region> out;
  std::size_t position = 0;
  for (const json& feature : doc.at("features")) {
    ++position;
    Region region;
    const json props = feature.value("properties", json::object());
    if (props.is_object() && props.contains("id") && !props["id"].is_null()) region.id = json_scalar_string(props["id"]);
    else if (feature.contains("id")) region.id = json_scalar_string(feature["id"]);
    else throw Error(ErrorCode::ParseError, "feature " + std::to_string(position) + " has no id");
    if (props.is_object() && props.contains("group") && !props["group"].is_null())
      region.group = json_scalar_string(props["group"]);

    const json& geom = feature.at("geometry");
    const std::string type = geom.at("type").get<std::string>();
    const json& coords = geom.at("coordinates");
    if (type == "Point") {
      region.centroid = {coords.at(0).get<double>(), coords.at(1).get<double>()};
    } else if (type == "Polygon" || type == "MultiPolygon") {
      std::vector<Ring> rings;
      if (type == "Polygon") {
        for (const json& r : coords) rings.push_back(parse_ring(r));
      } else {
        for (const json& poly : coords)
          for (const json& r : poly) rings.push_back(parse_ring(r));
      }
      if (rings.empty()) throw Error(ErrorCode::DegenerateGeometry, "region '" + region.id + "': empty polygon");
      validate_ring(rings.front(), region.id);
      region.centroid = ring_centroid(rings.front());
      region.boundary = std::move(rings);
    } else {
      throw Error(ErrorCode::ParseError, "unsupported geometry type '" + type + "'");
    }
    out.push_back(std::move(region));
  }
  return out;
}

std::vector<Region> regions_from_csv(const fs::path& path) {
  const csv::Table t = csv::read(path);
  const std::size_t c_id = t.require("id", path);
  const std::size_t c_x = t.require("x", path);
  const std::size_t c_y = t.require("y", path);
  const auto c_group = t.find("group");
  std::vector<Region> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    Region region;
    region.id = row[c_id];
    const auto x = csv::parse_number(row[c_x], false);
    const auto y = csv::parse_number(row[c_y], false);
    if (!x || !y)
      throw Error(ErrorCode::NonNumericCell, path.string() + " row " + std::to_string(r + 2) + ": bad coordinate");
    region.centroid = {*x, *y};
    if (c_group && !row[*c_group].empty()) region.group = row[*c_group];
    out.push_back(std::move(region));
  }
  return out;
}

std::vector<Region> load_regions(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::FileNotFound, path.string());
  if (path.extension() == ".csv") return regions_from_csv(path);
  json doc;
  try {
    doc = json::parse(csv::read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return regions_from_geojson(doc);
}

std::string regions_to_csv(const std::vector<Region>& regions) {
  csv::Writer w({"id", "x", "y", "group"});
  for (const Region& r : regions)
    w.row({r.id, csv::format_number(r.centroid.x), csv::format_number(r.centroid.y), r.group.value_or("")});
  return w.str();
}

json regions_to_geojson(const std::vector<Region>& regions) {
  json features = json::array();
  for (const Region& r : regions) {
    json geometry;
    if (r.boundary) {
      json rings = json::array();
      for (const Ring& ring : *r.boundary) {
        json coords = json::array();
        for (const Point& p : ring) coords.push_back({p.x, p.y});
        rings.push_back(std::move(coords));
      }
      geometry = {{"type", "Polygon"}, {"coordinates", std::move(rings)}};
    } else {
      geometry = {{"type", "Point"}, {"coordinates", {r.centroid.x, r.centroid.y}}};
    }
    json props = {{"id", r.id}};
    if (r.group) props["group"] = *r.group;
    features.push_back({{"type", "Feature"}, {"properties", std::move(props)}, {"geometry", std::move(geometry)}});
  }
  return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

std::string edge_list_csv(const RegionGraph& graph) {
  csv::Writer w({"src", "dst"});
  for (const auto& [i, j] : graph.edges()) w.row({graph.region(i).id, graph.region(j).id});
  return w.str();
}

RegionGraph load_graph(std::vector<Region> regions, const fs::path& edge_list) {
  const csv::Table t = csv::read(edge_list);
  const std::size_t c_src = t.require("src", edge_list);
  const std::size_t c_dst = t.require("dst", edge_list);
  std::unordered_map<std::string, Index> index;
  for (std::size_t i = 0; i < regions.size(); ++i) index.emplace(regions[i].id, static_cast<Index>(i));
  auto lookup = [&](const std::string& id) {
    auto it = index.find(id);
    if (it == index.end()) throw Error(ErrorCode::MissingRegion, "edge list references unknown region '" + id + "'");
    return it->second;
  };
  std::vector<RegionGraph::Edge> edges;
  edges.reserve(t.rows.size());
  for (const auto& row : t.rows) edges.emplace_back(lookup(row[c_src]), lookup(row[c_dst]));
  return RegionGraph(std::move(regions), edges);
}

}  // namespace geohealth::io
