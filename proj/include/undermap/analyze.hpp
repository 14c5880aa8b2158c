#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "undermap/cluster.hpp"
#include "undermap/types.hpp"

namespace undermap {

// One discovered neighborhood: the cells that carry a label and the style
// histogram aggregated over every record inside those cells.
struct Neighborhood {
  int label = 0;
  StyleHistogram descriptor;
  std::vector<CellIndex> cells;

  friend bool operator==(const Neighborhood&, const Neighborhood&) = default;
};

struct CityProfile {
  std::string city;
  StyleHistogram descriptor;  // over all of the city's records
  std::vector<Neighborhood> neighborhoods;
  int dropped_labels = 0;  // labels whose cells attracted no records

  friend bool operator==(const CityProfile&, const CityProfile&) = default;
};

// Attributes each record to the map cell containing it. Records in
// unassigned cells (or outside the grid) count toward the city descriptor
// only.
CityProfile build_profile(const CityDataset& dataset, const NeighborhoodMap& map,
                          const std::string& city_name = {});

// The neighborhood maximizing the minimum L1 distance to every other
// neighborhood of the same city; ties go to the lowest index. Returns
// (index into profile.neighborhoods, score).
std::pair<int, double> unique_neighborhood(const CityProfile& profile);

struct UniqueEntry {
  std::string city;
  int label = 0;
  double score = 0.0;

  friend bool operator==(const UniqueEntry&, const UniqueEntry&) = default;
};

// Every city's neighborhoods ranked by their min-L1-to-others score,
// descending; ties by (city, label).
std::vector<UniqueEntry> rank_unique_across_cities(const std::vector<CityProfile>& profiles);

struct ScoredPair {
  int a = 0;  // neighborhood index in the first profile
  int b = 0;  // neighborhood index in the second profile
  double value = 0.0;

  friend bool operator==(const ScoredPair&, const ScoredPair&) = default;
};

// All cross-city neighborhood pairs, ascending by L1 distance between
// descriptors; ties by index pair.
std::vector<ScoredPair> similar_pairs(const CityProfile& a, const CityProfile& b);

// Entrywise sign of the neighborhood's deviation from its city descriptor:
// +1 above tolerance, -1 below, 0 otherwise.
std::vector<std::int8_t> contextual_encoding(const StyleHistogram& neighborhood,
                                             const StyleHistogram& city, double tolerance = 0.0);

// Cosine distance between sign encodings, in [0, 2]; defined as 1 when
// either encoding is all zeros.
double sign_cosine_distance(const std::vector<std::int8_t>& u, const std::vector<std::int8_t>& v);

// All cross-city pairs ranked by cosine distance between the neighborhoods'
// contextual encodings, ascending; ties by index pair.
std::vector<ScoredPair> analogy_pairs(const CityProfile& a, const CityProfile& b,
                                      double tolerance = 0.0);

}  // namespace undermap
