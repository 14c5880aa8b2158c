#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "undermap/types.hpp"

namespace undermap {

struct Rect {
  double w = 0.0;
  double s = 0.0;
  double width = 0.0;
  double height = 0.0;

  double area() const { return width * height; }
  bool contains(const LonLat& p) const {
    return p.lon >= w && p.lon < w + width && p.lat >= s && p.lat < s + height;
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

// One planted region: a union of rectangles sharing a style distribution.
// Regions with the same label become one ground-truth class.
struct PlantedRegionSpec {
  std::vector<Rect> rects;
  std::vector<double> style_distribution;
  double density = 0.0;  // expected records per d x d cell (d = cell_spacing)
  std::string label;
};

struct PlantedCity {
  std::string name;
  BoundingBox bbox;
  int style_count = 0;
  double cell_spacing = 0.01;  // the d that `density` refers to
  std::vector<PlantedRegionSpec> regions;
};

void validate(const PlantedCity& spec);

// Region containing the point, if any. Regions are disjoint by contract.
std::optional<int> region_at(const PlantedCity& spec, const LonLat& p);

struct GeneratedCity {
  CityDataset dataset;
  LabelGrid truth;
};

// Draws Poisson(density * area / d^2) records per region, uniform inside the
// region, styles from the region's distribution. The truth grid labels every
// cell (at `truth_granularity`) whose center falls inside a region.
GeneratedCity generate_city(const PlantedCity& spec, std::uint64_t seed,
                            double truth_granularity = 0.01);

// Four quadrant regions with Dirichlet(alpha)-drawn style distributions
// (re-drawn until every pairwise L1 separation reaches 0.4). Quadrants are
// separated by a 0.03 degree corridor, wider than the default sampling
// radius, so featurized cells never mix regions.
PlantedCity planted_quadrants(const BoundingBox& bbox, int style_count, double density,
                              std::uint64_t seed, double dirichlet_alpha = 0.1);

// Four quadrants where the two diagonal regions 0 and 2 share one style
// distribution (and one ground-truth class); style clustering can merge the
// twins, spatially contiguous clustering cannot.
PlantedCity split_twin_spec(const BoundingBox& bbox, int style_count, double density,
                            std::uint64_t seed);

// Two cities with shifted base style distributions, derived from `base`
// (its bbox, style count and first region's density). Each city has three
// stacked regions: "special" deviates from its own city mean with the same
// sign pattern in both cities, while "confound" drifts toward the other
// city's base, making it the closest cross pair in raw L1. The style count
// must be a positive multiple of 4.
std::pair<PlantedCity, PlantedCity> shifted_city_pair(const PlantedCity& base, double shift,
                                                      std::uint64_t seed);

}  // namespace undermap
