#include "undermap/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "undermap/geodata.hpp"
#include "undermap/serialize.hpp"
#include "text.hpp"

namespace undermap {

namespace {

using detail::format_double;
using detail::parse_double;
using detail::parse_int;
using detail::parse_u64;
using detail::split;
using detail::trim;

constexpr const char* kManifestMagic = "undermap-manifest v1";

const char* mode_name(FeatureMode mode) {
  return mode == FeatureMode::kHard ? "hard" : "exp";
}

const char* rule_name(UpdateRule rule) {
  return rule == UpdateRule::kMedian ? "median" : "mean";
}

double require_positive(const std::string& key, const std::string& value) {
  const auto v = parse_double(value);
  if (!v || *v <= 0.0) throw UsageError("config: " + key + " must be a positive number");
  return *v;
}

int require_int_at_least(const std::string& key, const std::string& value, int lo) {
  const auto v = parse_int(value);
  if (!v || *v < lo) {
    throw UsageError("config: " + key + " must be an integer >= " + std::to_string(lo));
  }
  return static_cast<int>(*v);
}

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex;
  for (int shift = 60; shift >= 0; shift -= 4) {
    out << "0123456789abcdef"[(v >> shift) & 0xF];
  }
  return out.str();
}

}  // namespace

PipelineConfig PipelineConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config: " + path);
  PipelineConfig config;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    config.set(std::string(trim(t.substr(0, eq))), std::string(trim(t.substr(eq + 1))));
  }
  return config;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  if (key == "r") {
    r = require_positive(key, value);
  } else if (key == "d") {
    d = require_positive(key, value);
  } else if (key == "c") {
    c = require_int_at_least(key, value, 1);
  } else if (key == "k") {
    k = require_int_at_least(key, value, 1);
  } else if (key == "min_support") {
    min_support = require_int_at_least(key, value, 1);
  } else if (key == "mode") {
    if (value == "hard") mode = FeatureMode::kHard;
    else if (value == "exp") mode = FeatureMode::kExponential;
    else throw UsageError("config: mode must be 'hard' or 'exp'");
  } else if (key == "beta") {
    const auto v = parse_double(value);
    if (!v) throw UsageError("config: beta must be a number");
    beta = *v;
  } else if (key == "update_rule") {
    if (value == "median") update_rule = UpdateRule::kMedian;
    else if (value == "mean") update_rule = UpdateRule::kMean;
    else throw UsageError("config: update_rule must be 'median' or 'mean'");
  } else if (key == "restarts") {
    restarts = require_int_at_least(key, value, 1);
  } else if (key == "seed") {
    const auto v = parse_u64(value);
    if (!v) throw UsageError("config: seed must be a non-negative integer");
    seed = *v;
  } else if (key == "snap") {
    const auto v = parse_double(value);
    if (!v || *v < 0.0) throw UsageError("config: snap must be a non-negative number");
    snap = *v;
  } else if (key == "workers") {
    workers = require_int_at_least(key, value, 1);
  } else {
    throw UsageError("config: unknown key '" + key + "'");
  }
}

std::string PipelineConfig::get(const std::string& key) const {
  if (key == "r") return format_double(r);
  if (key == "d") return format_double(d);
  if (key == "c") return std::to_string(c);
  if (key == "k") return std::to_string(k);
  if (key == "min_support") return std::to_string(min_support);
  if (key == "mode") return mode_name(mode);
  if (key == "beta") return format_double(beta);
  if (key == "update_rule") return rule_name(update_rule);
  if (key == "restarts") return std::to_string(restarts);
  if (key == "seed") return std::to_string(seed);
  if (key == "snap") return format_double(snap);
  if (key == "workers") return std::to_string(workers);
  throw UsageError("config: unknown key '" + key + "'");
}

std::string PipelineConfig::canonical() const {
  static const char* keys[] = {"beta", "c",        "d",    "k",    "min_support", "mode",
                               "r",    "restarts", "seed", "snap", "update_rule", "workers"};
  std::ostringstream out;
  for (const char* key : keys) out << key << '=' << get(key) << '\n';
  return out.str();
}

std::uint64_t PipelineConfig::hash() const { return detail::fnv1a(canonical()); }

FeaturizeOptions PipelineConfig::featurize_options() const {
  FeaturizeOptions options;
  options.radius = r;
  options.mode = mode;
  options.beta = beta;
  options.min_support = min_support;
  return options;
}

KMeansOptions PipelineConfig::kmeans_options() const {
  KMeansOptions options;
  options.update_rule = update_rule;
  options.restarts = restarts;
  options.workers = workers;
  return options;
}

void PipelineConfig::require_run_fields() const {
  if (c < 1) throw UsageError("config: cluster count 'c' is required");
  if (k < 1) throw UsageError("config: style count 'k' is required");
}

std::uint64_t digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buffer[1 << 16];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    h = detail::fnv1a(std::string_view(buffer, static_cast<std::size_t>(in.gcount())), h);
  }
  return h;
}

RunArtifacts run_pipeline(const PipelineConfig& config, const std::string& records_path,
                          const std::string& out_dir) {
  config.require_run_fields();
  std::filesystem::create_directories(out_dir);

  const auto dataset = load_records(records_path, config.k);
  const auto bbox = bounding_box(dataset, config.d);
  const auto grid = config.snap > 0.0 ? GridSpec::snapped(bbox, config.d, config.snap)
                                      : GridSpec::make(bbox, config.d);

  const SpatialIndex index(dataset, config.r);
  const auto features =
      featurize_grid(index, grid, config.featurize_options(), config.workers);
  const auto map = kmeans_l1(features, config.c, config.seed, config.kmeans_options());

  RunArtifacts artifacts;
  const std::filesystem::path dir(out_dir);
  artifacts.features_path = (dir / "features.txt").string();
  artifacts.map_path = (dir / "map.txt").string();
  artifacts.geojson_path = (dir / "map.geojson").string();
  artifacts.manifest_path = (dir / "manifest.txt").string();

  save_features(features, artifacts.features_path);
  save_map(map, artifacts.map_path);
  {
    std::ofstream out(artifacts.geojson_path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + artifacts.geojson_path);
    out << export_geojson(map, top_styles(map, 3));
    if (!out) throw DataError("write failed: " + artifacts.geojson_path);
  }

  std::ofstream manifest(artifacts.manifest_path, std::ios::binary);
  if (!manifest) throw DataError("cannot write file: " + artifacts.manifest_path);
  manifest << kManifestMagic << '\n';
  manifest << "config_hash," << hex64(config.hash()) << '\n';
  manifest << "input_digest," << hex64(digest_file(records_path)) << '\n';
  manifest << "records," << std::filesystem::path(records_path).filename().string() << '\n';
  std::istringstream canon(config.canonical());
  std::string line;
  while (std::getline(canon, line)) {
    const auto eq = line.find('=');
    manifest << line.substr(0, eq) << ',' << line.substr(eq + 1) << '\n';
  }
  manifest << "artifact,features,features.txt\n";
  manifest << "artifact,map,map.txt\n";
  manifest << "artifact,geojson,map.geojson\n";
  if (!manifest) throw DataError("write failed: " + artifacts.manifest_path);

  return artifacts;
}

}  // namespace undermap
