// Exercises the shared-library surface end to end: handles, error codes,
// and the full synth -> featurize -> cluster -> evaluate flow through C.

#include "undermap/capi.h"

#include <cstring>
#include <string>
#include <vector>

#include <doctest.h>

#include "support.hpp"

using testsupport::TempDir;
using testsupport::read_file;
using testsupport::write_file;

namespace {

struct Config {
  um_config* ptr = um_config_new();
  ~Config() { um_config_free(ptr); }
  void set(const char* key, const char* value) { REQUIRE(um_config_set(ptr, key, value) == UM_OK); }
};

}  // namespace

TEST_CASE("config handle set/get/hash") {
  Config config;
  char buffer[32];
  REQUIRE(um_config_get(config.ptr, "r", buffer, sizeof(buffer)) == UM_OK);
  CHECK(std::string(buffer) == "0.02");

  const auto before = um_config_hash(config.ptr);
  config.set("c", "4");
  CHECK(um_config_hash(config.ptr) != before);

  CHECK(um_config_set(config.ptr, "bogus", "1") == UM_ERR_USAGE);
  CHECK(std::string(um_last_error()).find("bogus") != std::string::npos);
  CHECK(um_config_get(config.ptr, "r", buffer, 2) == UM_ERR_USAGE);
}

TEST_CASE("dataset loading reports data errors with messages") {
  um_dataset* dataset = nullptr;
  CHECK(um_dataset_load("/no/such/file.csv", 4, &dataset) == UM_ERR_DATA);
  CHECK(um_last_error()[0] != '\0');
  CHECK(um_dataset_load(nullptr, 4, &dataset) == UM_ERR_USAGE);

  TempDir dir("capi");
  const auto path = dir.file("records.csv");
  write_file(path, "id,lat,lon,style\na,1.0,2.0,0\nb,1.01,2.01,1\nbad,line\n");
  REQUIRE(um_dataset_load(path.c_str(), 2, &dataset) == UM_OK);
  CHECK(um_dataset_size(dataset) == 2);
  CHECK(um_dataset_style_count(dataset) == 2);
  CHECK(um_dataset_skipped_lines(dataset) == 1);

  double w = 0, s = 0, width = 0, height = 0;
  REQUIRE(um_dataset_bbox(dataset, &w, &s, &width, &height) == UM_OK);
  CHECK(w == 2.0);
  CHECK(s == 1.0);
  um_dataset_free(dataset);
}

TEST_CASE("full pipeline through the C surface") {
  TempDir dir("capi-pipeline");
  const auto records = dir.file("records.csv");
  const auto labels = dir.file("labels.csv");

  Config synth_config;
  synth_config.set("seed", "3");
  REQUIRE(um_synth_write("split-twin", synth_config.ptr, records.c_str(), labels.c_str(),
                         nullptr, nullptr) == UM_OK);
  CHECK(um_synth_write("nope", synth_config.ptr, records.c_str(), labels.c_str(), nullptr,
                       nullptr) == UM_ERR_USAGE);

  um_dataset* dataset = nullptr;
  REQUIRE(um_dataset_load(records.c_str(), 8, &dataset) == UM_OK);

  Config config;
  config.set("c", "3");
  config.set("k", "8");
  config.set("seed", "3");
  config.set("snap", "0.01");

  um_features* features = nullptr;
  REQUIRE(um_featurize(dataset, config.ptr, &features) == UM_OK);
  CHECK(um_features_assigned_count(features) > 0);
  CHECK(um_features_assigned_count(features) <= um_features_cell_count(features));

  const auto features_path = dir.file("features.txt");
  REQUIRE(um_features_save(features, features_path.c_str()) == UM_OK);
  um_features* reloaded = nullptr;
  REQUIRE(um_features_load(features_path.c_str(), &reloaded) == UM_OK);
  CHECK(um_features_assigned_count(reloaded) == um_features_assigned_count(features));

  um_map* map = nullptr;
  REQUIRE(um_cluster(features, config.ptr, &map) == UM_OK);
  CHECK(um_map_cluster_count(map) == 3);
  CHECK(um_map_inertia(map) >= 0.0);

  const auto map_path = dir.file("map.txt");
  REQUIRE(um_map_save(map, map_path.c_str()) == UM_OK);
  um_map* map_reloaded = nullptr;
  REQUIRE(um_map_load(map_path.c_str(), &map_reloaded) == UM_OK);
  CHECK(um_map_cluster_count(map_reloaded) == 3);

  const auto geojson_path = dir.file("map.geojson");
  REQUIRE(um_map_export_geojson(map, geojson_path.c_str()) == UM_OK);
  CHECK(read_file(geojson_path).find("FeatureCollection") != std::string::npos);

  um_label_grid* benchmark = nullptr;
  REQUIRE(um_label_grid_load(labels.c_str(), &benchmark) == UM_OK);
  CHECK(um_label_grid_label_count(benchmark) == 3);
  char name[64];
  REQUIRE(um_label_grid_label_name(benchmark, 0, name, sizeof(name)) == UM_OK);
  CHECK(std::string(name) == "twin");

  um_eval_summary summary{};
  REQUIRE(um_evaluate(map, benchmark, &summary) == UM_OK);
  CHECK(summary.pair_count > 0);
  CHECK(summary.nmi >= 0.0);
  CHECK(summary.nmi <= 1.0);
  CHECK(summary.purity > 0.0);

  size_t n_classes = 0;
  REQUIRE(um_evaluate_per_class(map, benchmark, nullptr, &n_classes) == UM_OK);
  CHECK(n_classes == 3);
  std::vector<double> per_class(n_classes);
  REQUIRE(um_evaluate_per_class(map, benchmark, per_class.data(), &n_classes) == UM_OK);
  for (double iou : per_class) {
    CHECK(iou >= 0.0);
    CHECK(iou <= 1.0);
  }

  um_map* baseline = nullptr;
  REQUIRE(um_baseline("random", features, config.ptr, &baseline) == UM_OK);
  CHECK(um_map_assigned_count(baseline) == um_features_assigned_count(features));
  CHECK(um_baseline("nope", features, config.ptr, &baseline) == UM_ERR_USAGE);

  um_profile* profile = nullptr;
  REQUIRE(um_profile_build("twin-city", dataset, map, &profile) == UM_OK);
  CHECK(um_profile_size(profile) == 3);
  int unique_index = -1;
  double unique_score = 0.0;
  REQUIRE(um_profile_unique(profile, &unique_index, &unique_score) == UM_OK);
  CHECK(unique_index >= 0);
  CHECK(unique_score > 0.0);

  um_pairs* pairs = nullptr;
  REQUIRE(um_similar_pairs(profile, profile, &pairs) == UM_OK);
  CHECK(um_pairs_size(pairs) == 9);
  int a = -1, b = -1;
  double value = -1.0;
  REQUIRE(um_pairs_get(pairs, 0, &a, &b, &value) == UM_OK);
  CHECK(value == 0.0);  // self-pair distance
  CHECK(um_pairs_get(pairs, 99, &a, &b, &value) == UM_ERR_USAGE);
  um_pairs_free(pairs);

  um_pairs* analogies = nullptr;
  REQUIRE(um_analogy_pairs(profile, profile, 0.0, &analogies) == UM_OK);
  CHECK(um_pairs_size(analogies) == 9);
  um_pairs_free(analogies);

  const um_profile* profiles[] = {profile};
  um_pairs* ranked = nullptr;
  REQUIRE(um_rank_unique(profiles, 1, &ranked) == UM_OK);
  CHECK(um_pairs_size(ranked) == 3);
  REQUIRE(um_pairs_get(ranked, 0, &a, &b, &value) == UM_OK);
  CHECK(a == 0);
  CHECK(value >= 0.0);
  um_pairs_free(ranked);

  um_profile_free(profile);
  um_map_free(baseline);
  um_map_free(map_reloaded);
  um_map_free(map);
  um_features_free(reloaded);
  um_features_free(features);
  um_label_grid_free(benchmark);
  um_dataset_free(dataset);
}

TEST_CASE("um_run produces identical artifacts for any worker count") {
  TempDir dir("capi-run");
  const auto records = dir.file("records.csv");
  const auto labels = dir.file("labels.csv");
  Config synth_config;
  synth_config.set("seed", "6");
  REQUIRE(um_synth_write("split-twin", synth_config.ptr, records.c_str(), labels.c_str(),
                         nullptr, nullptr) == UM_OK);

  Config config;
  config.set("c", "3");
  config.set("k", "8");
  config.set("seed", "1");
  config.set("snap", "0.01");
  REQUIRE(um_run(config.ptr, records.c_str(), dir.file("out1").c_str()) == UM_OK);
  config.set("workers", "4");
  REQUIRE(um_run(config.ptr, records.c_str(), dir.file("out2").c_str()) == UM_OK);

  CHECK(read_file(dir.file("out1/map.txt")) == read_file(dir.file("out2/map.txt")));
  CHECK(read_file(dir.file("out1/features.txt")) == read_file(dir.file("out2/features.txt")));
  CHECK(read_file(dir.file("out1/map.geojson")) == read_file(dir.file("out2/map.geojson")));

  // usage errors surface as UM_ERR_USAGE
  Config incomplete;
  CHECK(um_run(incomplete.ptr, records.c_str(), dir.file("out3").c_str()) == UM_ERR_USAGE);
}

TEST_CASE("config files load through the C surface with override precedence") {
  TempDir dir("capi-config");
  const auto path = dir.file("run.cfg");
  write_file(path, "r=0.05\nseed=9\nc=2\n");

  Config config;
  config.set("r", "0.04");  // overwritten by the file load below
  REQUIRE(um_config_load_file(config.ptr, path.c_str()) == UM_OK);
  char buffer[32];
  REQUIRE(um_config_get(config.ptr, "r", buffer, sizeof(buffer)) == UM_OK);
  CHECK(std::string(buffer) == "0.05");

  // explicit sets after the load win, mirroring the CLI's flag precedence
  config.set("r", "0.03");
  REQUIRE(um_config_get(config.ptr, "r", buffer, sizeof(buffer)) == UM_OK);
  CHECK(std::string(buffer) == "0.03");
  REQUIRE(um_config_get(config.ptr, "seed", buffer, sizeof(buffer)) == UM_OK);
  CHECK(std::string(buffer) == "9");

  CHECK(um_config_load_file(config.ptr, dir.file("missing.cfg").c_str()) == UM_ERR_DATA);
}

TEST_CASE("version string is present") {
  CHECK(std::strlen(um_version()) > 0);
}
