// undermap: discover neighborhood maps of cities from geo-tagged style
// records. Featurizes a sampling grid into style histograms, clusters them
// under the L1 metric, and runs uniqueness / similarity / analogy / benchmark
// analyses on the result.
//
// The tool is a thin shell over the C API in undermap/capi.h; all pipeline
// behavior lives in the shared library.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "undermap/capi.h"

namespace {

// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
int exit_code(um_status status) { return static_cast<int>(status); }

[[noreturn]] void fail(um_status status) {
  std::cerr << "error: " << um_last_error() << "\n";
  std::exit(exit_code(status));
}

void check(um_status status) {
  if (status != UM_OK) fail(status);
}

struct ConfigHandle {
  um_config* ptr = um_config_new();
  ~ConfigHandle() { um_config_free(ptr); }
  ConfigHandle() = default;
  ConfigHandle(const ConfigHandle&) = delete;
  ConfigHandle& operator=(const ConfigHandle&) = delete;
};

// Common pipeline flags. Defaults live in the library; only flags the user
// actually passed are pushed into the config, after any --config file, so
// the precedence is defaults < file < command line.
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Flat key=value config file");
    const auto bind = [this, cmd](const std::string& key, const std::string& help) {
      cmd->add_option_function<std::string>(
             "--" + key, [this, key](const std::string& v) { values[key] = v; }, help)
          ->option_text("VALUE");
    };
    bind("r", "Sampling radius in degrees (default 0.02)");
    bind("d", "Grid spacing in degrees (default 0.01)");
    bind("c", "Number of clusters");
    bind("k", "Number of styles");
    bind("min_support", "Minimum records per cell (default 10)");
    bind("mode", "Featurization mode: hard|exp (default hard)");
    bind("beta", "Exponential-mode decay; <=0 means 1/r (default 0)");
    bind("update_rule", "Centroid rule: median|mean (default median)");
    bind("restarts", "K-means restarts (default 10)");
    bind("seed", "Random seed (default 0)");
    bind("snap", "Snap grid origin to this granularity; 0 disables (default 0)");
    bind("workers", "Worker threads for featurize/cluster (default 1)");
  }

  void apply(um_config* config) const {
    if (!config_path.empty()) check(um_config_load_file(config, config_path.c_str()));
    for (const auto& [key, value] : values) {
      check(um_config_set(config, key.c_str(), value.c_str()));
    }
  }
};

struct CityArg {
  std::string name;
  std::string records;
  std::string map;
};

// "name:records.csv:map.txt"
CityArg parse_city(const std::string& spec) {
  const auto first = spec.find(':');
  const auto second = first == std::string::npos ? std::string::npos
                                                 : spec.find(':', first + 1);
  if (first == std::string::npos || second == std::string::npos) {
    std::cerr << "error: city spec must be name:records:map, got '" << spec << "'\n";
    std::exit(1);
  }
  return CityArg{spec.substr(0, first), spec.substr(first + 1, second - first - 1),
                 spec.substr(second + 1)};
}

struct LoadedCity {
  CityArg arg;
  um_dataset* dataset = nullptr;
  um_map* map = nullptr;
  um_profile* profile = nullptr;

  ~LoadedCity() {
    um_profile_free(profile);
    um_map_free(map);
    um_dataset_free(dataset);
  }
};

std::unique_ptr<LoadedCity> load_city(const CityArg& arg, int style_count) {
  auto city = std::make_unique<LoadedCity>();
  city->arg = arg;
  check(um_dataset_load(arg.records.c_str(), style_count, &city->dataset));
  check(um_map_load(arg.map.c_str(), &city->map));
  check(um_profile_build(arg.name.c_str(), city->dataset, city->map, &city->profile));
  return city;
}

int label_of(const um_profile* profile, int index) {
  int label = 0;
  check(um_profile_label(profile, index, &label));
  return label;
}

std::ofstream open_report(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    std::exit(2);
  }
  return out;
}

void report_line(std::ostream& out, const std::string& city_a, int label_a,
                 const std::string& city_b, int label_b, const std::string& metric,
                 double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  out << city_a << ',' << (label_a < 0 ? std::string("-") : std::to_string(label_a)) << ','
      << city_b << ',' << (label_b < 0 ? std::string("-") : std::to_string(label_b)) << ','
      << metric << ',' << buf << '\n';
}

int require_k(const ConfigHandle& config) {
  char buf[32];
  check(um_config_get(config.ptr, "k", buf, sizeof(buf)));
  const int k = std::atoi(buf);
  if (k < 1) {
    std::cerr << "error: style count --k is required\n";
    std::exit(1);
  }
  return k;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"undermap: neighborhood maps from geo-tagged style records"};
  app.require_subcommand(1);

  // ---- run ---------------------------------------------------------------
  auto* cmd_run = app.add_subcommand("run", "Full pipeline: records -> map artifacts");
  ConfigFlags run_flags;
  std::string run_records, run_out_dir;
  cmd_run->add_option("--records", run_records, "Input record file")->required();
  cmd_run->add_option("--out-dir", run_out_dir, "Output directory")->required();
  run_flags.add_to(cmd_run);

  // ---- synth ---------------------------------------------------------------
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic city with ground truth");
  ConfigFlags synth_flags;
  std::string synth_scenario = "planted4";
  std::string synth_records, synth_labels, synth_records_b, synth_labels_b;
  cmd_synth->add_option("--scenario", synth_scenario,
                        "planted4 | split-twin | shifted-pair")
      ->capture_default_str();
  cmd_synth->add_option("--out-records", synth_records, "Record file to write")->required();
  cmd_synth->add_option("--out-labels", synth_labels, "Truth label grid to write")->required();
  cmd_synth->add_option("--out-records-b", synth_records_b,
                        "Second city's records (shifted-pair only)");
  cmd_synth->add_option("--out-labels-b", synth_labels_b,
                        "Second city's labels (shifted-pair only)");
  synth_flags.add_to(cmd_synth);

  // ---- featurize -----------------------------------------------------------
  auto* cmd_feat = app.add_subcommand("featurize", "Records -> per-cell style histograms");
  ConfigFlags feat_flags;
  std::string feat_records, feat_out;
  cmd_feat->add_option("--records", feat_records, "Input record file")->required();
  cmd_feat->add_option("--out", feat_out, "Feature dump to write")->required();
  feat_flags.add_to(cmd_feat);

  // ---- cluster ---------------------------------------------------------------
  auto* cmd_cluster = app.add_subcommand("cluster", "Features -> neighborhood map");
  ConfigFlags cluster_flags;
  std::string cluster_features, cluster_out, cluster_geojson;
  cmd_cluster->add_option("--features", cluster_features, "Feature dump")->required();
  cmd_cluster->add_option("--out", cluster_out, "Map file to write")->required();
  cmd_cluster->add_option("--geojson", cluster_geojson, "Optional GeoJSON to write");
  cluster_flags.add_to(cmd_cluster);

  // ---- baseline ---------------------------------------------------------------
  auto* cmd_baseline = app.add_subcommand("baseline", "Reference map from a baseline method");
  ConfigFlags baseline_flags;
  std::string baseline_kind, baseline_features, baseline_out;
  cmd_baseline->add_option("--kind", baseline_kind, "random | proximity | pid")->required();
  cmd_baseline->add_option("--features", baseline_features, "Feature dump")->required();
  cmd_baseline->add_option("--out", baseline_out, "Map file to write")->required();
  baseline_flags.add_to(cmd_baseline);

  // ---- unique ---------------------------------------------------------------
  auto* cmd_unique = app.add_subcommand("unique", "Most distinct neighborhoods per city");
  ConfigFlags unique_flags;
  std::vector<std::string> unique_cities;
  std::string unique_out;
  cmd_unique->add_option("cities", unique_cities, "name:records:map (one or more)")
      ->required()
      ->expected(-1);
  cmd_unique->add_option("--out", unique_out, "Report file (default stdout only)");
  unique_flags.add_to(cmd_unique);

  // ---- similar / analogy -----------------------------------------------------
  auto* cmd_similar = app.add_subcommand("similar", "Cross-city neighborhood similarity");
  ConfigFlags similar_flags;
  std::vector<std::string> similar_cities;
  std::string similar_out;
  int similar_top = 10;
  cmd_similar->add_option("cities", similar_cities, "Exactly two name:records:map specs")
      ->required()
      ->expected(2);
  cmd_similar->add_option("--out", similar_out, "Report file (default stdout only)");
  cmd_similar->add_option("--top", similar_top, "Rows to print")->capture_default_str();
  similar_flags.add_to(cmd_similar);

  auto* cmd_analogy = app.add_subcommand("analogy", "Cross-city analogies via sign encodings");
  ConfigFlags analogy_flags;
  std::vector<std::string> analogy_cities;
  std::string analogy_out;
  int analogy_top = 10;
  double analogy_tau = 0.0;
  cmd_analogy->add_option("cities", analogy_cities, "Exactly two name:records:map specs")
      ->required()
      ->expected(2);
  cmd_analogy->add_option("--out", analogy_out, "Report file (default stdout only)");
  cmd_analogy->add_option("--top", analogy_top, "Rows to print")->capture_default_str();
  cmd_analogy->add_option("--tau", analogy_tau, "Sign tolerance for the encoding")
      ->capture_default_str();
  analogy_flags.add_to(cmd_analogy);

  // ---- evaluate ---------------------------------------------------------------
  auto* cmd_eval = app.add_subcommand("evaluate", "Score a map against a benchmark grid");
  ConfigFlags eval_flags;
  std::string eval_map, eval_benchmark, eval_out;
  cmd_eval->add_option("--map", eval_map, "Map file")->required();
  cmd_eval->add_option("--benchmark", eval_benchmark, "Benchmark label grid")->required();
  cmd_eval->add_option("--out", eval_out, "Report file (default stdout only)");
  eval_flags.add_to(cmd_eval);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  ConfigHandle config;

  if (cmd_run->parsed()) {
    run_flags.apply(config.ptr);
    check(um_run(config.ptr, run_records.c_str(), run_out_dir.c_str()));
    std::cout << "wrote features.txt, map.txt, map.geojson, manifest.txt to " << run_out_dir
              << "\n";
    return 0;
  }

  if (cmd_synth->parsed()) {
    synth_flags.apply(config.ptr);
    const bool pair = synth_scenario == "shifted-pair";
    if (pair && (synth_records_b.empty() || synth_labels_b.empty())) {
      std::cerr << "error: shifted-pair requires --out-records-b and --out-labels-b\n";
      return 1;
    }
    if (!pair && (!synth_records_b.empty() || !synth_labels_b.empty())) {
      std::cerr << "error: --out-records-b/--out-labels-b only apply to shifted-pair\n";
      return 1;
    }
    check(um_synth_write(synth_scenario.c_str(), config.ptr, synth_records.c_str(),
                         synth_labels.c_str(),
                         pair ? synth_records_b.c_str() : nullptr,
                         pair ? synth_labels_b.c_str() : nullptr));
    std::cout << "wrote " << synth_records << " and " << synth_labels;
    if (pair) std::cout << " plus " << synth_records_b << " and " << synth_labels_b;
    std::cout << "\n";
    return 0;
  }

  if (cmd_feat->parsed()) {
    feat_flags.apply(config.ptr);
    const int k = require_k(config);
    um_dataset* dataset = nullptr;
    check(um_dataset_load(feat_records.c_str(), k, &dataset));
    um_features* features = nullptr;
    um_status status = um_featurize(dataset, config.ptr, &features);
    if (status == UM_OK) status = um_features_save(features, feat_out.c_str());
    const auto assigned = um_features_assigned_count(features);
    const auto cells = um_features_cell_count(features);
    const auto skipped = um_dataset_skipped_lines(dataset);
    um_features_free(features);
    um_dataset_free(dataset);
    if (status != UM_OK) fail(status);
    std::cout << "featurized " << assigned << "/" << cells << " cells (skipped " << skipped
              << " malformed lines) -> " << feat_out << "\n";
    return 0;
  }

  if (cmd_cluster->parsed()) {
    cluster_flags.apply(config.ptr);
    um_features* features = nullptr;
    check(um_features_load(cluster_features.c_str(), &features));
    um_map* map = nullptr;
    um_status status = um_cluster(features, config.ptr, &map);
    if (status == UM_OK) status = um_map_save(map, cluster_out.c_str());
    if (status == UM_OK && !cluster_geojson.empty()) {
      status = um_map_export_geojson(map, cluster_geojson.c_str());
    }
    const double inertia = um_map_inertia(map);
    const auto assigned = um_map_assigned_count(map);
    um_map_free(map);
    um_features_free(features);
    if (status != UM_OK) fail(status);
    std::cout << "clustered " << assigned << " cells, inertia " << inertia << " -> "
              << cluster_out << "\n";
    return 0;
  }

  if (cmd_baseline->parsed()) {
    baseline_flags.apply(config.ptr);
    um_features* features = nullptr;
    check(um_features_load(baseline_features.c_str(), &features));
    um_map* map = nullptr;
    um_status status = um_baseline(baseline_kind.c_str(), features, config.ptr, &map);
    if (status == UM_OK) status = um_map_save(map, baseline_out.c_str());
    um_map_free(map);
    um_features_free(features);
    if (status != UM_OK) fail(status);
    std::cout << "baseline '" << baseline_kind << "' -> " << baseline_out << "\n";
    return 0;
  }

  if (cmd_unique->parsed()) {
    unique_flags.apply(config.ptr);
    const int k = require_k(config);
    std::vector<std::unique_ptr<LoadedCity>> cities;
    std::vector<const um_profile*> profiles;
    for (const auto& spec : unique_cities) {
      cities.push_back(load_city(parse_city(spec), k));
      profiles.push_back(cities.back()->profile);
    }

    std::optional<std::ofstream> file;
    if (!unique_out.empty()) file = open_report(unique_out);

    for (const auto& city : cities) {
      int index = 0;
      double score = 0.0;
      check(um_profile_unique(city->profile, &index, &score));
      const int label = label_of(city->profile, index);
      std::cout << city->arg.name << ": most unique neighborhood is label " << label
                << " (min L1 to others " << score << ")\n";
      if (file) report_line(*file, city->arg.name, label, "-", -1, "unique_min_l1", score);
    }

    um_pairs* ranked = nullptr;
    check(um_rank_unique(profiles.data(), profiles.size(), &ranked));
    std::cout << "\ncity,label,score (descending)\n";
    for (size_t i = 0; i < um_pairs_size(ranked); ++i) {
      int profile_index = 0, neighborhood = 0;
      double score = 0.0;
      check(um_pairs_get(ranked, i, &profile_index, &neighborhood, &score));
      const auto& city = cities[static_cast<size_t>(profile_index)];
      const int label = label_of(city->profile, neighborhood);
      std::cout << city->arg.name << "," << label << "," << score << "\n";
      if (file) report_line(*file, city->arg.name, label, "-", -1, "unique_rank", score);
    }
    um_pairs_free(ranked);
    return 0;
  }

  const auto run_pair_analysis = [&](ConfigFlags& flags, const std::vector<std::string>& specs,
                                     const std::string& out_path, int top,
                                     const char* metric, bool analogy, double tau) {
    flags.apply(config.ptr);
    const int k = require_k(config);
    auto city_a = load_city(parse_city(specs[0]), k);
    auto city_b = load_city(parse_city(specs[1]), k);

    um_pairs* pairs = nullptr;
    if (analogy) {
      check(um_analogy_pairs(city_a->profile, city_b->profile, tau, &pairs));
    } else {
      check(um_similar_pairs(city_a->profile, city_b->profile, &pairs));
    }

    std::optional<std::ofstream> file;
    if (!out_path.empty()) file = open_report(out_path);

    std::cout << city_a->arg.name << " x " << city_b->arg.name << " (" << metric
              << ", ascending)\n";
    const size_t total = um_pairs_size(pairs);
    for (size_t i = 0; i < total; ++i) {
      int ia = 0, ib = 0;
      double value = 0.0;
      check(um_pairs_get(pairs, i, &ia, &ib, &value));
      const int label_a = label_of(city_a->profile, ia);
      const int label_b = label_of(city_b->profile, ib);
      if (i < static_cast<size_t>(top)) {
        std::cout << "  " << city_a->arg.name << ":" << label_a << "  ~  "
                  << city_b->arg.name << ":" << label_b << "  " << value << "\n";
      }
      if (file) {
        report_line(*file, city_a->arg.name, label_a, city_b->arg.name, label_b, metric,
                    value);
      }
    }
    um_pairs_free(pairs);
  };

  if (cmd_similar->parsed()) {
    run_pair_analysis(similar_flags, similar_cities, similar_out, similar_top, "similar_l1",
                      false, 0.0);
    return 0;
  }

  if (cmd_analogy->parsed()) {
    run_pair_analysis(analogy_flags, analogy_cities, analogy_out, analogy_top,
                      "analogy_cosine", true, analogy_tau);
    return 0;
  }

  if (cmd_eval->parsed()) {
    eval_flags.apply(config.ptr);
    um_map* map = nullptr;
    check(um_map_load(eval_map.c_str(), &map));
    um_label_grid* benchmark = nullptr;
    um_status status = um_label_grid_load(eval_benchmark.c_str(), &benchmark);
    if (status != UM_OK) {
      um_map_free(map);
      fail(status);
    }

    um_eval_summary summary{};
    status = um_evaluate(map, benchmark, &summary);
    size_t n_classes = 0;
    std::vector<double> per_class;
    if (status == UM_OK) {
      status = um_evaluate_per_class(map, benchmark, nullptr, &n_classes);
      if (status == UM_OK) {
        per_class.resize(n_classes);
        status = um_evaluate_per_class(map, benchmark, per_class.data(), &n_classes);
      }
    }
    if (status != UM_OK) {
      um_label_grid_free(benchmark);
      um_map_free(map);
      fail(status);
    }

    std::cout << "pairs: " << summary.pair_count
              << " (dropped benchmark cells: " << summary.dropped_benchmark
              << ", unmatched map cells: " << summary.dropped_map << ")\n";
    std::cout << "NMI    " << summary.nmi << "\n";
    std::cout << "Purity " << summary.purity << "\n";
    std::cout << "MMIoU  " << summary.mmiou << "\n";
    std::cout << "per-class IoU:\n";
    std::optional<std::ofstream> file;
    if (!eval_out.empty()) {
      file = open_report(eval_out);
      report_line(*file, "map", -1, "benchmark", -1, "nmi", summary.nmi);
      report_line(*file, "map", -1, "benchmark", -1, "purity", summary.purity);
      report_line(*file, "map", -1, "benchmark", -1, "mmiou", summary.mmiou);
      report_line(*file, "map", -1, "benchmark", -1, "pairs",
                  static_cast<double>(summary.pair_count));
      report_line(*file, "map", -1, "benchmark", -1, "dropped_benchmark",
                  static_cast<double>(summary.dropped_benchmark));
      report_line(*file, "map", -1, "benchmark", -1, "dropped_map",
                  static_cast<double>(summary.dropped_map));
    }
    for (size_t i = 0; i < per_class.size(); ++i) {
      char name[128] = "?";
      check(um_label_grid_label_name(benchmark, static_cast<int>(i), name, sizeof(name)));
      std::cout << "  " << name << ": " << per_class[i] << "\n";
      if (file) {
        report_line(*file, "map", -1, name, static_cast<int>(i), "class_iou", per_class[i]);
      }
    }
    um_label_grid_free(benchmark);
    um_map_free(map);
    return 0;
  }

  return 1;
}
