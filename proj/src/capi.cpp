#include "undermap/capi.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "undermap/analyze.hpp"
#include "undermap/cluster.hpp"
#include "undermap/evaluate.hpp"
#include "undermap/featurize.hpp"
#include "undermap/geodata.hpp"
#include "undermap/pipeline.hpp"
#include "undermap/serialize.hpp"
#include "undermap/synth.hpp"

// Handle bodies. Each wraps one core value; the C surface never exposes
// core types directly.
struct um_config {
  undermap::PipelineConfig value;
};
struct um_dataset {
  undermap::CityDataset value;
};
struct um_features {
  undermap::FeatureGrid value;
};
struct um_map {
  undermap::NeighborhoodMap value;
};
struct um_label_grid {
  undermap::LabelGrid value;
};
struct um_profile {
  undermap::CityProfile value;
};
struct um_pairs {
  std::vector<undermap::ScoredPair> value;
};

namespace {

thread_local std::string g_last_error;

void set_error(const char* message) { g_last_error = message ? message : ""; }

template <typename Fn>
um_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    g_last_error.clear();
    return UM_OK;
  } catch (const undermap::UsageError& e) {
    set_error(e.what());
    return UM_ERR_USAGE;
  } catch (const undermap::DataError& e) {
    set_error(e.what());
    return UM_ERR_DATA;
  } catch (const std::exception& e) {
    set_error(e.what());
    return UM_ERR_INTERNAL;
  } catch (...) {
    set_error("unknown failure");
    return UM_ERR_INTERNAL;
  }
}

void require(bool condition, const char* message) {
  if (!condition) throw undermap::UsageError(message);
}

um_status copy_string(const std::string& text, char* buffer, size_t capacity) {
  return guarded([&] {
    require(buffer != nullptr && capacity > 0, "null output buffer");
    require(text.size() + 1 <= capacity, "output buffer too small");
    std::memcpy(buffer, text.c_str(), text.size() + 1);
  });
}

}  // namespace

extern "C" {

const char* um_version(void) { return "0.1.0"; }

const char* um_last_error(void) { return g_last_error.c_str(); }

/* ---- configuration ----------------------------------------------------- */

um_config* um_config_new(void) { return new (std::nothrow) um_config{}; }

void um_config_free(um_config* config) { delete config; }

um_status um_config_load_file(um_config* config, const char* path) {
  return guarded([&] {
    require(config && path, "null argument");
    config->value = undermap::PipelineConfig::load_file(path);
  });
}

um_status um_config_set(um_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config && key && value, "null argument");
    config->value.set(key, value);
  });
}

um_status um_config_get(const um_config* config, const char* key, char* buffer,
                        size_t capacity) {
  if (!config || !key) {
    set_error("null argument");
    return UM_ERR_USAGE;
  }
  std::string value;
  const um_status status = guarded([&] { value = config->value.get(key); });
  if (status != UM_OK) return status;
  return copy_string(value, buffer, capacity);
}

uint64_t um_config_hash(const um_config* config) {
  return config ? config->value.hash() : 0;
}

/* ---- datasets ----------------------------------------------------------- */

um_status um_dataset_load(const char* path, int style_count, um_dataset** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto handle = std::make_unique<um_dataset>();
    handle->value = undermap::load_records(path, style_count);
    *out = handle.release();
  });
}

void um_dataset_free(um_dataset* dataset) { delete dataset; }

int64_t um_dataset_size(const um_dataset* dataset) {
  return dataset ? static_cast<int64_t>(dataset->value.records.size()) : 0;
}

int um_dataset_style_count(const um_dataset* dataset) {
  return dataset ? dataset->value.style_count : 0;
}

int64_t um_dataset_skipped_lines(const um_dataset* dataset) {
  return dataset ? dataset->value.skipped_lines : 0;
}

um_status um_dataset_bbox(const um_dataset* dataset, double* w, double* s, double* width,
                          double* height) {
  return guarded([&] {
    require(dataset && w && s && width && height, "null argument");
    const auto box = undermap::bounding_box(dataset->value);
    *w = box.w;
    *s = box.s;
    *width = box.width;
    *height = box.height;
  });
}

/* ---- synthetic scenarios ------------------------------------------------ */

um_status um_synth_write(const char* scenario, const um_config* config,
                         const char* records_path, const char* labels_path,
                         const char* records_b_path, const char* labels_b_path) {
  return guarded([&] {
    require(scenario && config && records_path && labels_path, "null argument");
    const std::string kind = scenario;
    const std::uint64_t seed = config->value.seed;
    const undermap::BoundingBox bbox{10.0, 45.0, 0.23, 0.23};

    if (kind == "planted4") {
      require(!records_b_path && !labels_b_path, "planted4 writes a single city");
      const auto spec = undermap::planted_quadrants(bbox, 50, 50.0, seed);
      const auto city = undermap::generate_city(spec, seed);
      undermap::save_records(city.dataset, records_path);
      undermap::save_label_grid(city.truth, labels_path);
    } else if (kind == "split-twin") {
      require(!records_b_path && !labels_b_path, "split-twin writes a single city");
      const auto spec = undermap::split_twin_spec(bbox, 8, 40.0, seed);
      const auto city = undermap::generate_city(spec, seed);
      undermap::save_records(city.dataset, records_path);
      undermap::save_label_grid(city.truth, labels_path);
    } else if (kind == "shifted-pair") {
      require(records_b_path && labels_b_path, "shifted-pair needs the *_b paths");
      undermap::PlantedCity base;
      base.name = "base";
      base.bbox = undermap::BoundingBox{10.0, 45.0, 0.10, 0.33};
      base.style_count = 12;
      base.regions.push_back(undermap::PlantedRegionSpec{
          {undermap::Rect{10.0, 45.0, 0.10, 0.33}},
          std::vector<double>(12, 1.0 / 12.0),
          60.0,
          "base"});
      const auto [city_a, city_b] = undermap::shifted_city_pair(base, 0.028, seed);
      const auto generated_a = undermap::generate_city(city_a, seed);
      const auto generated_b = undermap::generate_city(city_b, seed + 1);
      undermap::save_records(generated_a.dataset, records_path);
      undermap::save_label_grid(generated_a.truth, labels_path);
      undermap::save_records(generated_b.dataset, records_b_path);
      undermap::save_label_grid(generated_b.truth, labels_b_path);
    } else {
      throw undermap::UsageError("unknown scenario '" + kind + "'");
    }
  });
}

/* ---- featurization ------------------------------------------------------ */

um_status um_featurize(const um_dataset* dataset, const um_config* config,
                       um_features** out) {
  return guarded([&] {
    require(dataset && config && out, "null argument");
    const auto& cfg = config->value;
    const auto bbox = undermap::bounding_box(dataset->value, cfg.d);
    const auto grid = cfg.snap > 0.0
                          ? undermap::GridSpec::snapped(bbox, cfg.d, cfg.snap)
                          : undermap::GridSpec::make(bbox, cfg.d);
    const undermap::SpatialIndex index(dataset->value, cfg.r);
    auto handle = std::make_unique<um_features>();
    handle->value =
        undermap::featurize_grid(index, grid, cfg.featurize_options(), cfg.workers);
    *out = handle.release();
  });
}

um_status um_features_save(const um_features* features, const char* path) {
  return guarded([&] {
    require(features && path, "null argument");
    undermap::save_features(features->value, path);
  });
}

um_status um_features_load(const char* path, um_features** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto handle = std::make_unique<um_features>();
    handle->value = undermap::load_features(path);
    *out = handle.release();
  });
}

void um_features_free(um_features* features) { delete features; }

int64_t um_features_cell_count(const um_features* features) {
  return features ? static_cast<int64_t>(features->value.cells.size()) : 0;
}

int64_t um_features_assigned_count(const um_features* features) {
  return features ? features->value.assigned_count() : 0;
}

/* ---- clustering and maps ------------------------------------------------ */

um_status um_cluster(const um_features* features, const um_config* config, um_map** out) {
  return guarded([&] {
    require(features && config && out, "null argument");
    const auto& cfg = config->value;
    require(cfg.c >= 1, "config: cluster count 'c' is required");
    auto handle = std::make_unique<um_map>();
    handle->value =
        undermap::kmeans_l1(features->value, cfg.c, cfg.seed, cfg.kmeans_options());
    *out = handle.release();
  });
}

um_status um_baseline(const char* kind, const um_features* features, const um_config* config,
                      um_map** out) {
  return guarded([&] {
    require(kind && features && config && out, "null argument");
    const auto& cfg = config->value;
    require(cfg.c >= 1, "config: cluster count 'c' is required");
    const std::string name = kind;
    auto handle = std::make_unique<um_map>();
    if (name == "random") {
      handle->value = undermap::baseline_random(features->value, cfg.c, cfg.seed);
    } else if (name == "proximity") {
      handle->value = undermap::baseline_proximity(features->value, cfg.c, cfg.seed,
                                                   cfg.kmeans_options());
    } else if (name == "pid") {
      handle->value =
          undermap::baseline_pid(features->value, cfg.c, cfg.seed, cfg.kmeans_options());
    } else {
      throw undermap::UsageError("unknown baseline '" + name + "'");
    }
    *out = handle.release();
  });
}

um_status um_map_save(const um_map* map, const char* path) {
  return guarded([&] {
    require(map && path, "null argument");
    undermap::save_map(map->value, path);
  });
}

um_status um_map_load(const char* path, um_map** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto handle = std::make_unique<um_map>();
    handle->value = undermap::load_map(path);
    *out = handle.release();
  });
}

void um_map_free(um_map* map) { delete map; }

int um_map_cluster_count(const um_map* map) {
  return map ? map->value.cluster_count() : 0;
}

int64_t um_map_assigned_count(const um_map* map) {
  return map ? map->value.assigned_count() : 0;
}

double um_map_inertia(const um_map* map) { return map ? map->value.inertia : 0.0; }

um_status um_map_export_geojson(const um_map* map, const char* path) {
  return guarded([&] {
    require(map && path, "null argument");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw undermap::DataError(std::string("cannot write file: ") + path);
    out << undermap::export_geojson(map->value, undermap::top_styles(map->value, 3));
    if (!out) throw undermap::DataError(std::string("write failed: ") + path);
  });
}

/* ---- benchmark evaluation ----------------------------------------------- */

um_status um_label_grid_load(const char* path, um_label_grid** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto handle = std::make_unique<um_label_grid>();
    handle->value = undermap::load_label_grid(path);
    *out = handle.release();
  });
}

void um_label_grid_free(um_label_grid* grid) { delete grid; }

int um_label_grid_label_count(const um_label_grid* grid) {
  return grid ? static_cast<int>(grid->value.label_names.size()) : 0;
}

um_status um_label_grid_label_name(const um_label_grid* grid, int label, char* buffer,
                                   size_t capacity) {
  if (!grid || label < 0 || label >= static_cast<int>(grid->value.label_names.size())) {
    set_error("label out of range");
    return UM_ERR_USAGE;
  }
  return copy_string(grid->value.label_names[static_cast<std::size_t>(label)], buffer,
                     capacity);
}

um_status um_evaluate(const um_map* map, const um_label_grid* benchmark,
                      um_eval_summary* out) {
  return guarded([&] {
    require(map && benchmark && out, "null argument");
    const auto aligned = undermap::align_to_benchmark(map->value, benchmark->value);
    if (aligned.predicted.empty()) {
      throw undermap::DataError("no overlap between map and benchmark");
    }
    out->nmi = undermap::nmi(aligned);
    out->purity = undermap::purity(aligned);
    out->mmiou = undermap::mmiou(aligned);
    out->pair_count = static_cast<int64_t>(aligned.predicted.size());
    out->dropped_benchmark = aligned.dropped_benchmark;
    out->dropped_map = aligned.dropped_map;
  });
}

um_status um_evaluate_per_class(const um_map* map, const um_label_grid* benchmark,
                                double* iou_out, size_t* count_inout) {
  return guarded([&] {
    require(map && benchmark && count_inout, "null argument");
    const auto aligned = undermap::align_to_benchmark(map->value, benchmark->value);
    if (aligned.predicted.empty()) {
      throw undermap::DataError("no overlap between map and benchmark");
    }
    auto per_class = undermap::mmiou_per_class(aligned);
    per_class.resize(benchmark->value.label_names.size(), 0.0);
    const size_t capacity = *count_inout;
    *count_inout = per_class.size();
    if (iou_out) {
      require(capacity >= per_class.size(), "output buffer too small");
      std::memcpy(iou_out, per_class.data(), per_class.size() * sizeof(double));
    }
  });
}

/* ---- neighborhood analysis ---------------------------------------------- */

um_status um_profile_build(const char* city_name, const um_dataset* dataset,
                           const um_map* map, um_profile** out) {
  return guarded([&] {
    require(dataset && map && out, "null argument");
    auto handle = std::make_unique<um_profile>();
    handle->value = undermap::build_profile(dataset->value, map->value,
                                            city_name ? city_name : "");
    *out = handle.release();
  });
}

void um_profile_free(um_profile* profile) { delete profile; }

int um_profile_size(const um_profile* profile) {
  return profile ? static_cast<int>(profile->value.neighborhoods.size()) : 0;
}

um_status um_profile_label(const um_profile* profile, int index, int* label_out) {
  return guarded([&] {
    require(profile && label_out, "null argument");
    require(index >= 0 &&
                index < static_cast<int>(profile->value.neighborhoods.size()),
            "neighborhood index out of range");
    *label_out = profile->value.neighborhoods[static_cast<std::size_t>(index)].label;
  });
}

um_status um_profile_unique(const um_profile* profile, int* index_out, double* score_out) {
  return guarded([&] {
    require(profile && index_out && score_out, "null argument");
    const auto [index, score] = undermap::unique_neighborhood(profile->value);
    *index_out = index;
    *score_out = score;
  });
}

void um_pairs_free(um_pairs* pairs) { delete pairs; }

size_t um_pairs_size(const um_pairs* pairs) { return pairs ? pairs->value.size() : 0; }

um_status um_pairs_get(const um_pairs* pairs, size_t index, int* a, int* b, double* value) {
  return guarded([&] {
    require(pairs && a && b && value, "null argument");
    require(index < pairs->value.size(), "pair index out of range");
    const auto& pair = pairs->value[index];
    *a = pair.a;
    *b = pair.b;
    *value = pair.value;
  });
}

um_status um_similar_pairs(const um_profile* a, const um_profile* b, um_pairs** out) {
  return guarded([&] {
    require(a && b && out, "null argument");
    auto handle = std::make_unique<um_pairs>();
    handle->value = undermap::similar_pairs(a->value, b->value);
    *out = handle.release();
  });
}

um_status um_analogy_pairs(const um_profile* a, const um_profile* b, double tolerance,
                           um_pairs** out) {
  return guarded([&] {
    require(a && b && out, "null argument");
    auto handle = std::make_unique<um_pairs>();
    handle->value = undermap::analogy_pairs(a->value, b->value, tolerance);
    *out = handle.release();
  });
}

um_status um_rank_unique(const um_profile* const* profiles, size_t count, um_pairs** out) {
  return guarded([&] {
    require(profiles && out && count > 0, "null argument");
    std::vector<undermap::CityProfile> cities;
    cities.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      require(profiles[i] != nullptr, "null profile");
      cities.push_back(profiles[i]->value);
    }
    const auto entries = undermap::rank_unique_across_cities(cities);

    auto handle = std::make_unique<um_pairs>();
    handle->value.reserve(entries.size());
    for (const auto& entry : entries) {
      // Map each ranked (city, label) back to profile and neighborhood
      // indices so callers can resolve names through the profile handles.
      int profile_index = -1, neighborhood_index = -1;
      for (size_t i = 0; i < count && profile_index < 0; ++i) {
        if (cities[i].city != entry.city) continue;
        for (size_t j = 0; j < cities[i].neighborhoods.size(); ++j) {
          if (cities[i].neighborhoods[j].label == entry.label) {
            profile_index = static_cast<int>(i);
            neighborhood_index = static_cast<int>(j);
            break;
          }
        }
      }
      handle->value.push_back(
          undermap::ScoredPair{profile_index, neighborhood_index, entry.score});
    }
    *out = handle.release();
  });
}

/* ---- end-to-end pipeline ------------------------------------------------ */

um_status um_run(const um_config* config, const char* records_path, const char* out_dir) {
  return guarded([&] {
    require(config && records_path && out_dir, "null argument");
    undermap::run_pipeline(config->value, records_path, out_dir);
  });
}

}  // extern "C"
