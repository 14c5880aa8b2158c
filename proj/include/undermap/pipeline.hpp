#pragma once

#include <cstdint>
#include <string>

#include "undermap/cluster.hpp"
#include "undermap/featurize.hpp"

namespace undermap {

// Flat key=value configuration for the end-to-end pipeline. Every field has
// a default except the cluster count `c` and style count `k`, which a run
// must set.
struct PipelineConfig {
  double r = 0.02;
  double d = 0.01;
  int c = 0;
  int k = 0;
  int min_support = 10;
  FeatureMode mode = FeatureMode::kHard;
  double beta = 0.0;  // <= 0 selects 1/r in exp mode
  UpdateRule update_rule = UpdateRule::kMedian;
  int restarts = 10;
  std::uint64_t seed = 0;
  double snap = 0.0;  // grid-origin snap granularity; 0 disables
  int workers = 1;

  static PipelineConfig load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  // Sorted key=value serialization; hashing it identifies the run settings.
  std::string canonical() const;
  std::uint64_t hash() const;

  FeaturizeOptions featurize_options() const;
  KMeansOptions kmeans_options() const;
  void require_run_fields() const;  // c and k must be set

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

struct RunArtifacts {
  std::string features_path;
  std::string map_path;
  std::string geojson_path;
  std::string manifest_path;
};

// Full pipeline: load records, featurize the (optionally snapped) grid,
// cluster, and write features/map/GeoJSON plus a manifest recording the
// config hash and an input digest. Deterministic for a fixed config,
// including the worker count.
RunArtifacts run_pipeline(const PipelineConfig& config, const std::string& records_path,
                          const std::string& out_dir);

std::uint64_t digest_file(const std::string& path);

}  // namespace undermap
