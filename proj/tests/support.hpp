#pragma once

// Shared helpers for the test binaries.

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "undermap/featurize.hpp"
#include "undermap/types.hpp"

namespace testsupport {

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("undermap-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline undermap::CityDataset make_dataset(const std::vector<undermap::StyleRecord>& records,
                                          int style_count, const std::string& name = "test") {
  undermap::CityDataset dataset;
  dataset.city_name = name;
  dataset.style_count = style_count;
  dataset.records = records;
  return dataset;
}

// Random histograms on the simplex, for oracle-backed clustering tests.
inline std::vector<std::vector<double>> random_histograms(std::mt19937_64& rng, int count,
                                                          int dims) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(count),
                                       std::vector<double>(static_cast<std::size_t>(dims)));
  for (auto& row : out) {
    double sum = 0.0;
    for (auto& v : row) {
      v = uniform(rng) + 1e-6;
      sum += v;
    }
    for (auto& v : row) v /= sum;
  }
  return out;
}

// Hand-built feature grid: every listed cell becomes assigned with the given
// histogram and support, effective location at the cell's lattice point
// unless overridden.
struct GridCell {
  undermap::CellIndex index;
  std::vector<double> histogram;
  std::int64_t support;
  std::optional<undermap::LonLat> effective;

  GridCell(undermap::CellIndex i, std::vector<double> h, std::int64_t s = 10,
           std::optional<undermap::LonLat> e = std::nullopt)
      : index(i), histogram(std::move(h)), support(s), effective(e) {}
};

inline undermap::FeatureGrid make_feature_grid(const undermap::GridSpec& grid, int style_count,
                                               const std::vector<GridCell>& cells) {
  undermap::FeatureGrid features;
  features.grid = grid;
  features.style_count = style_count;
  features.cells.assign(static_cast<std::size_t>(grid.cell_count()), std::nullopt);
  for (const auto& cell : cells) {
    undermap::LocationFeature feature;
    feature.location = grid.location(cell.index);
    feature.effective_location = cell.effective.value_or(feature.location);
    feature.support = cell.support;
    feature.histogram.values = cell.histogram;
    feature.histogram.support = cell.support;
    features.cells[static_cast<std::size_t>(grid.flat_index(cell.index))] = std::move(feature);
  }
  return features;
}

}  // namespace testsupport
