/* C API for the undermap core. All functions return um_status (except the
 * trivial accessors), never throw across the boundary, and report details
 * through um_last_error(). Handles are opaque; every um_*_free accepts NULL.
 */

#ifndef UNDERMAP_CAPI_H
#define UNDERMAP_CAPI_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define UM_API __declspec(dllexport)
#else
#define UM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum um_status {
  UM_OK = 0,
  UM_ERR_USAGE = 1,    /* bad arguments or configuration */
  UM_ERR_DATA = 2,     /* unusable input data or files */
  UM_ERR_INTERNAL = 3, /* anything else */
} um_status;

UM_API const char* um_version(void);

/* Message for the most recent failure on this thread; empty if none. */
UM_API const char* um_last_error(void);

/* ---- configuration ----------------------------------------------------- */

typedef struct um_config um_config;

UM_API um_config* um_config_new(void);
UM_API void um_config_free(um_config* config);
UM_API um_status um_config_load_file(um_config* config, const char* path);
UM_API um_status um_config_set(um_config* config, const char* key, const char* value);
UM_API um_status um_config_get(const um_config* config, const char* key, char* buffer,
                               size_t capacity);
UM_API uint64_t um_config_hash(const um_config* config);

/* ---- datasets ----------------------------------------------------------- */

typedef struct um_dataset um_dataset;

UM_API um_status um_dataset_load(const char* path, int style_count, um_dataset** out);
UM_API void um_dataset_free(um_dataset* dataset);
UM_API int64_t um_dataset_size(const um_dataset* dataset);
UM_API int um_dataset_style_count(const um_dataset* dataset);
UM_API int64_t um_dataset_skipped_lines(const um_dataset* dataset);
/* west, south, width, height in degrees */
UM_API um_status um_dataset_bbox(const um_dataset* dataset, double* w, double* s,
                                 double* width, double* height);

/* ---- synthetic scenarios ------------------------------------------------ */

/* Writes records and ground-truth label grids for a named scenario:
 *   "planted4"     four regions, Dirichlet-separated styles (K=50)
 *   "split-twin"   two distant regions sharing one style (K=8)
 *   "shifted-pair" analogy oracle, writes the *_b paths too (K=12)
 * The *_b paths must be NULL except for "shifted-pair". The seed is read
 * from the config.
 */
UM_API um_status um_synth_write(const char* scenario, const um_config* config,
                                const char* records_path, const char* labels_path,
                                const char* records_b_path, const char* labels_b_path);

/* ---- featurization ------------------------------------------------------ */

typedef struct um_features um_features;

UM_API um_status um_featurize(const um_dataset* dataset, const um_config* config,
                              um_features** out);
UM_API um_status um_features_save(const um_features* features, const char* path);
UM_API um_status um_features_load(const char* path, um_features** out);
UM_API void um_features_free(um_features* features);
UM_API int64_t um_features_cell_count(const um_features* features);
UM_API int64_t um_features_assigned_count(const um_features* features);

/* ---- clustering and maps ------------------------------------------------ */

typedef struct um_map um_map;

UM_API um_status um_cluster(const um_features* features, const um_config* config,
                            um_map** out);
/* kind: "random", "proximity", or "pid" */
UM_API um_status um_baseline(const char* kind, const um_features* features,
                             const um_config* config, um_map** out);
UM_API um_status um_map_save(const um_map* map, const char* path);
UM_API um_status um_map_load(const char* path, um_map** out);
UM_API void um_map_free(um_map* map);
UM_API int um_map_cluster_count(const um_map* map);
UM_API int64_t um_map_assigned_count(const um_map* map);
UM_API double um_map_inertia(const um_map* map);
UM_API um_status um_map_export_geojson(const um_map* map, const char* path);

/* ---- benchmark evaluation ----------------------------------------------- */

typedef struct um_label_grid um_label_grid;

UM_API um_status um_label_grid_load(const char* path, um_label_grid** out);
UM_API void um_label_grid_free(um_label_grid* grid);
UM_API int um_label_grid_label_count(const um_label_grid* grid);
UM_API um_status um_label_grid_label_name(const um_label_grid* grid, int label,
                                          char* buffer, size_t capacity);

typedef struct um_eval_summary {
  double nmi;
  double purity;
  double mmiou;
  int64_t pair_count;
  int64_t dropped_benchmark;
  int64_t dropped_map;
} um_eval_summary;

UM_API um_status um_evaluate(const um_map* map, const um_label_grid* benchmark,
                             um_eval_summary* out);
/* Per-ground-truth-class best IoU; *count_inout carries the buffer capacity
 * in and the class count out. */
UM_API um_status um_evaluate_per_class(const um_map* map, const um_label_grid* benchmark,
                                       double* iou_out, size_t* count_inout);

/* ---- neighborhood analysis ---------------------------------------------- */

typedef struct um_profile um_profile;

UM_API um_status um_profile_build(const char* city_name, const um_dataset* dataset,
                                  const um_map* map, um_profile** out);
UM_API void um_profile_free(um_profile* profile);
UM_API int um_profile_size(const um_profile* profile);
UM_API um_status um_profile_label(const um_profile* profile, int index, int* label_out);
/* Most distinct neighborhood of the city: index and min-L1 score. */
UM_API um_status um_profile_unique(const um_profile* profile, int* index_out,
                                   double* score_out);

/* Scored (a, b, value) triples; meaning depends on the producing call. */
typedef struct um_pairs um_pairs;

UM_API void um_pairs_free(um_pairs* pairs);
UM_API size_t um_pairs_size(const um_pairs* pairs);
UM_API um_status um_pairs_get(const um_pairs* pairs, size_t index, int* a, int* b,
                              double* value);

/* Cross-city neighborhood pairs by ascending descriptor L1 distance. */
UM_API um_status um_similar_pairs(const um_profile* a, const um_profile* b, um_pairs** out);
/* Cross-city pairs by ascending cosine distance between contextual sign
 * encodings (tolerance applied to the sign threshold). */
UM_API um_status um_analogy_pairs(const um_profile* a, const um_profile* b,
                                  double tolerance, um_pairs** out);
/* All neighborhoods of all profiles by descending uniqueness; a = profile
 * index, b = neighborhood index within that profile. */
UM_API um_status um_rank_unique(const um_profile* const* profiles, size_t count,
                                um_pairs** out);

/* ---- end-to-end pipeline ------------------------------------------------ */

/* Runs featurize + cluster + export and writes features.txt, map.txt,
 * map.geojson and manifest.txt into out_dir. */
UM_API um_status um_run(const um_config* config, const char* records_path,
                        const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* UNDERMAP_CAPI_H */
