#pragma once

#include <optional>
#include <vector>

#include "undermap/types.hpp"

namespace undermap {

// Slack when mapping continuous coordinates onto the lattice, so spacings
// like 0.01 that are not exactly representable still bin as intended.
inline constexpr double kLatticeEps = 1e-9;

// Uniform sampling lattice over a bounding box. Cell (i, j) sits at
// (w + d*i, s + d*j); as an area it covers the half-open square of side d
// north-east of that point.
struct GridSpec {
  BoundingBox bbox;
  double spacing = 0.0;
  int n_cols = 0;
  int n_rows = 0;

  static GridSpec make(const BoundingBox& bbox, double d);
  // Same lattice but with the origin snapped down to a multiple of
  // `granularity`, so map cells line up with benchmark cells.
  static GridSpec snapped(const BoundingBox& bbox, double d, double granularity);

  int cell_count() const { return n_cols * n_rows; }
  int flat_index(CellIndex c) const { return c.row * n_cols + c.col; }
  CellIndex cell_at(int flat) const { return {flat % n_cols, flat / n_cols}; }
  LonLat location(CellIndex c) const {
    return {bbox.w + spacing * c.col, bbox.s + spacing * c.row};
  }
  std::optional<CellIndex> cell_containing(const LonLat& p) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Row-major lattice locations, exactly (floor(W/d)+1) * (floor(H/d)+1) points.
std::vector<LonLat> grid_locations(const BoundingBox& bbox, double d);

// Uniform bucket grid over record locations. Buckets are sized to the query
// radius so a lookup touches at most a 3x3 block of buckets.
class SpatialIndex {
 public:
  SpatialIndex(const CityDataset& dataset, double bucket_size);

  // Indices of records strictly closer than `r`, in ascending order.
  std::vector<std::size_t> radius_query(const LonLat& center, double r) const;

  const CityDataset& dataset() const { return *dataset_; }
  double bucket_size() const { return bucket_size_; }

 private:
  struct Key {
    std::int64_t x = 0;
    std::int64_t y = 0;
    friend auto operator<=>(const Key&, const Key&) = default;
  };
  Key key_for(const LonLat& p) const;

  const CityDataset* dataset_;
  double bucket_size_;
  std::vector<std::size_t> entries_;       // record indices grouped by bucket
  std::vector<std::pair<Key, std::pair<std::uint32_t, std::uint32_t>>> buckets_;
};

enum class FeatureMode { kHard, kExponential };

struct FeaturizeOptions {
  double radius = 0.02;
  FeatureMode mode = FeatureMode::kHard;
  double beta = 0.0;  // <= 0 selects the 1/radius default
  int min_support = 10;

  double effective_beta() const { return beta > 0.0 ? beta : 1.0 / radius; }

  friend bool operator==(const FeaturizeOptions&, const FeaturizeOptions&) = default;
};

struct LocationFeature {
  LonLat location;
  StyleHistogram histogram;
  std::int64_t support = 0;
  // Weighted centroid of the contributing records; the in-radius sample is
  // rarely centered on the lattice point itself.
  LonLat effective_location;

  friend bool operator==(const LocationFeature&, const LocationFeature&) = default;
};

// Style histogram of the records within `radius` of `center`; nullopt when
// fewer than min_support records are in range.
std::optional<LocationFeature> featurize(const SpatialIndex& index, const LonLat& center,
                                         const FeaturizeOptions& options);

struct FeatureGrid {
  GridSpec grid;
  int style_count = 0;
  FeaturizeOptions options;
  std::vector<std::optional<LocationFeature>> cells;  // row-major, one per cell

  std::int64_t assigned_count() const;
  std::vector<int> assigned_indices() const;

  friend bool operator==(const FeatureGrid&, const FeatureGrid&) = default;
};

// One feature per grid cell in row-major order. The result is identical for
// any worker count.
FeatureGrid featurize_grid(const SpatialIndex& index, const GridSpec& grid,
                           const FeaturizeOptions& options, int workers = 1);

// Intersection-over-union of two radius-r disks whose centers are d apart
// (closed-form lens area).
double adjacent_iou(double r, double d);

}  // namespace undermap
