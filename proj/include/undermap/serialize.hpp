#pragma once

#include <optional>
#include <string>
#include <vector>

#include "undermap/cluster.hpp"
#include "undermap/featurize.hpp"

namespace undermap {

// Line-delimited stage artifacts, each starting with a versioned magic
// header. Doubles are written in shortest round-trip form, so save/load is
// an identity and reruns are byte-stable.

void save_features(const FeatureGrid& features, const std::string& path);
FeatureGrid load_features(const std::string& path);

void save_map(const NeighborhoodMap& map, const std::string& path);
NeighborhoodMap load_map(const std::string& path);

// GeoJSON FeatureCollection with one square polygon per assigned cell.
// When `top_styles` is given, each feature carries its cluster's style
// ranking.
std::string export_geojson(const NeighborhoodMap& map,
                           const std::vector<std::vector<int>>& top_styles = {});

}  // namespace undermap
