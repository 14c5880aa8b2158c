#include "undermap/featurize.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

namespace undermap {

namespace {

int lattice_count(double extent, double d) {
  return static_cast<int>(std::floor(extent / d + kLatticeEps)) + 1;
}

}  // namespace

GridSpec GridSpec::make(const BoundingBox& bbox, double d) {
  if (d <= 0.0) throw UsageError("grid spacing must be positive");
  if (bbox.width <= 0.0 || bbox.height <= 0.0) {
    throw UsageError("grid requires a box with positive extent");
  }
  GridSpec grid;
  grid.bbox = bbox;
  grid.spacing = d;
  grid.n_cols = lattice_count(bbox.width, d);
  grid.n_rows = lattice_count(bbox.height, d);
  return grid;
}

GridSpec GridSpec::snapped(const BoundingBox& bbox, double d, double granularity) {
  if (granularity <= 0.0) throw UsageError("snap granularity must be positive");
  BoundingBox snapped = bbox;
  snapped.w = std::floor(bbox.w / granularity + kLatticeEps) * granularity;
  snapped.s = std::floor(bbox.s / granularity + kLatticeEps) * granularity;
  snapped.width = bbox.east() - snapped.w;
  snapped.height = bbox.north() - snapped.s;
  return make(snapped, d);
}

std::optional<CellIndex> GridSpec::cell_containing(const LonLat& p) const {
  const int col = static_cast<int>(std::floor((p.lon - bbox.w) / spacing + kLatticeEps));
  const int row = static_cast<int>(std::floor((p.lat - bbox.s) / spacing + kLatticeEps));
  if (col < 0 || col >= n_cols || row < 0 || row >= n_rows) return std::nullopt;
  return CellIndex{col, row};
}

std::vector<LonLat> grid_locations(const BoundingBox& bbox, double d) {
  const GridSpec grid = GridSpec::make(bbox, d);
  std::vector<LonLat> out;
  out.reserve(static_cast<std::size_t>(grid.cell_count()));
  for (int row = 0; row < grid.n_rows; ++row) {
    for (int col = 0; col < grid.n_cols; ++col) {
      out.push_back(grid.location({col, row}));
    }
  }
  return out;
}

SpatialIndex::SpatialIndex(const CityDataset& dataset, double bucket_size)
    : dataset_(&dataset), bucket_size_(bucket_size) {
  if (bucket_size <= 0.0) throw UsageError("bucket size must be positive");

  std::vector<std::pair<Key, std::size_t>> keyed;
  keyed.reserve(dataset.records.size());
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    keyed.emplace_back(key_for({dataset.records[i].lon, dataset.records[i].lat}), i);
  }
  std::sort(keyed.begin(), keyed.end());

  entries_.reserve(keyed.size());
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    if (i == 0 || keyed[i].first != keyed[i - 1].first) {
      buckets_.push_back({keyed[i].first,
                          {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i)}});
    }
    buckets_.back().second.second = static_cast<std::uint32_t>(i + 1);
    entries_.push_back(keyed[i].second);
  }
}

SpatialIndex::Key SpatialIndex::key_for(const LonLat& p) const {
  return {static_cast<std::int64_t>(std::floor(p.lon / bucket_size_)),
          static_cast<std::int64_t>(std::floor(p.lat / bucket_size_))};
}

std::vector<std::size_t> SpatialIndex::radius_query(const LonLat& center, double r) const {
  if (r <= 0.0) throw UsageError("query radius must be positive");
  std::vector<std::size_t> hits;

  // The query disk can span ceil(r / bucket_size) buckets past the center's.
  const auto reach = static_cast<std::int64_t>(std::ceil(r / bucket_size_));
  const Key base = key_for(center);
  for (std::int64_t dy = -reach; dy <= reach; ++dy) {
    for (std::int64_t dx = -reach; dx <= reach; ++dx) {
      const Key key{base.x + dx, base.y + dy};
      auto it = std::lower_bound(
          buckets_.begin(), buckets_.end(), key,
          [](const auto& bucket, const Key& k) { return bucket.first < k; });
      if (it == buckets_.end() || it->first != key) continue;
      for (std::uint32_t e = it->second.first; e < it->second.second; ++e) {
        const std::size_t idx = entries_[e];
        const auto& rec = dataset_->records[idx];
        if (euclidean({rec.lon, rec.lat}, center) < r) hits.push_back(idx);
      }
    }
  }
  std::sort(hits.begin(), hits.end());
  return hits;
}

std::optional<LocationFeature> featurize(const SpatialIndex& index, const LonLat& center,
                                         const FeaturizeOptions& options) {
  if (options.radius <= 0.0) throw UsageError("featurize: radius must be positive");
  if (options.min_support < 1) throw UsageError("featurize: min_support must be >= 1");

  const auto in_range = index.radius_query(center, options.radius);
  if (static_cast<std::int64_t>(in_range.size()) < options.min_support) return std::nullopt;

  const auto& records = index.dataset().records;
  const int k = index.dataset().style_count;
  const double beta = options.effective_beta();

  LocationFeature feature;
  feature.location = center;
  feature.support = static_cast<std::int64_t>(in_range.size());
  feature.histogram.values.assign(static_cast<std::size_t>(k), 0.0);
  feature.histogram.support = feature.support;

  double total_weight = 0.0;
  double lon_sum = 0.0;
  double lat_sum = 0.0;
  for (std::size_t idx : in_range) {
    const auto& rec = records[idx];
    double weight = 1.0;
    if (options.mode == FeatureMode::kExponential) {
      weight = std::exp(-beta * euclidean({rec.lon, rec.lat}, center));
    }
    feature.histogram.values[static_cast<std::size_t>(rec.style_id)] += weight;
    lon_sum += weight * rec.lon;
    lat_sum += weight * rec.lat;
    total_weight += weight;
  }
  for (auto& v : feature.histogram.values) v /= total_weight;
  feature.effective_location = {lon_sum / total_weight, lat_sum / total_weight};
  return feature;
}

std::int64_t FeatureGrid::assigned_count() const {
  std::int64_t n = 0;
  for (const auto& c : cells) n += c.has_value() ? 1 : 0;
  return n;
}

std::vector<int> FeatureGrid::assigned_indices() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(cells.size()); ++i) {
    if (cells[static_cast<std::size_t>(i)].has_value()) out.push_back(i);
  }
  return out;
}

FeatureGrid featurize_grid(const SpatialIndex& index, const GridSpec& grid,
                           const FeaturizeOptions& options, int workers) {
  FeatureGrid out;
  out.grid = grid;
  out.style_count = index.dataset().style_count;
  out.options = options;
  out.cells.resize(static_cast<std::size_t>(grid.cell_count()));

  const int total = grid.cell_count();
  const int n_threads = std::clamp(workers, 1, std::max(1, total));

  // Each cell is computed independently and written to its own slot, so the
  // assembled result does not depend on the worker count.
  const auto run_range = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      out.cells[static_cast<std::size_t>(i)] =
          featurize(index, grid.location(grid.cell_at(i)), options);
    }
  };

  if (n_threads == 1) {
    run_range(0, total);
    return out;
  }

  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_threads));
  const int chunk = (total + n_threads - 1) / n_threads;
  for (int t = 0; t < n_threads; ++t) {
    const int begin = t * chunk;
    const int end = std::min(total, begin + chunk);
    pool.emplace_back([&, t, begin, end] {
      try {
        run_range(begin, end);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return out;
}

double adjacent_iou(double r, double d) {
  if (r <= 0.0) throw UsageError("adjacent_iou: radius must be positive");
  if (d < 0.0) throw UsageError("adjacent_iou: distance must be non-negative");
  if (d >= 2.0 * r) return 0.0;

  const double lens = 2.0 * r * r * std::acos(d / (2.0 * r)) -
                      (d / 2.0) * std::sqrt(4.0 * r * r - d * d);
  const double disks = 2.0 * std::numbers::pi * r * r;
  return lens / (disks - lens);
}

}  // namespace undermap
