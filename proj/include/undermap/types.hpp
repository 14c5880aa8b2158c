#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace undermap {

// Thrown for malformed requests (bad arguments, bad config keys).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown for unusable input data (missing files, malformed formats).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;

  friend bool operator==(const LonLat&, const LonLat&) = default;
};

inline double euclidean(const LonLat& a, const LonLat& b) {
  const double dx = a.lon - b.lon;
  const double dy = a.lat - b.lat;
  return std::sqrt(dx * dx + dy * dy);
}

struct CellIndex {
  int col = 0;
  int row = 0;

  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

// One geo-tagged style observation.
struct StyleRecord {
  std::string id;
  double lat = 0.0;
  double lon = 0.0;
  int style_id = 0;

  friend bool operator==(const StyleRecord&, const StyleRecord&) = default;
};

struct CityDataset {
  std::string city_name;
  int style_count = 0;
  std::vector<StyleRecord> records;
  std::int64_t skipped_lines = 0;  // malformed lines dropped by the loader
};

// Axis-aligned box in degree space; (w, s) is the southwestern corner.
struct BoundingBox {
  double w = 0.0;
  double s = 0.0;
  double width = 0.0;
  double height = 0.0;

  double east() const { return w + width; }
  double north() const { return s + height; }
  bool contains(const LonLat& p) const {
    return p.lon >= w && p.lon <= east() && p.lat >= s && p.lat <= north();
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Distribution over the K styles. Entries are non-negative and sum to 1
// whenever support > 0.
struct StyleHistogram {
  std::vector<double> values;
  std::int64_t support = 0;

  std::size_t size() const { return values.size(); }

  friend bool operator==(const StyleHistogram&, const StyleHistogram&) = default;
};

double l1_distance(const std::vector<double>& a, const std::vector<double>& b);

// Benchmark ground-truth labels on a fixed angular lattice. Cell (col, row)
// covers [origin + col*g, origin + (col+1)*g) on each axis.
struct LabelGrid {
  double origin_lon = 0.0;
  double origin_lat = 0.0;
  double granularity = 0.0;
  std::map<CellIndex, int> cells;
  std::vector<std::string> label_names;

  friend bool operator==(const LabelGrid&, const LabelGrid&) = default;
};

}  // namespace undermap
