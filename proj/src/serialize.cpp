#include "undermap/serialize.hpp"

#include <fstream>

#include <json.hpp>

#include "text.hpp"

namespace undermap {

namespace {

using detail::format_double;
using detail::parse_double;
using detail::parse_int;
using detail::split;
using detail::trim;

constexpr const char* kFeaturesMagic = "undermap-features v1";
constexpr const char* kMapMagic = "undermap-map v1";

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  return out;
}

void expect_magic(std::ifstream& in, const std::string& path, const char* magic) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != magic) {
    throw DataError(path + ": missing '" + magic + "' header");
  }
}

void write_grid(std::ofstream& out, const GridSpec& grid) {
  out << "grid," << format_double(grid.bbox.w) << ',' << format_double(grid.bbox.s) << ','
      << format_double(grid.bbox.width) << ',' << format_double(grid.bbox.height) << ','
      << format_double(grid.spacing) << ',' << grid.n_cols << ',' << grid.n_rows << '\n';
}

GridSpec read_grid(const std::vector<std::string_view>& fields, const std::string& path) {
  if (fields.size() != 8) throw DataError(path + ": malformed grid line");
  GridSpec grid;
  const auto w = parse_double(fields[1]);
  const auto s = parse_double(fields[2]);
  const auto width = parse_double(fields[3]);
  const auto height = parse_double(fields[4]);
  const auto spacing = parse_double(fields[5]);
  const auto cols = parse_int(fields[6]);
  const auto rows = parse_int(fields[7]);
  if (!w || !s || !width || !height || !spacing || !cols || !rows || *spacing <= 0.0) {
    throw DataError(path + ": malformed grid line");
  }
  grid.bbox = BoundingBox{*w, *s, *width, *height};
  grid.spacing = *spacing;
  grid.n_cols = static_cast<int>(*cols);
  grid.n_rows = static_cast<int>(*rows);
  return grid;
}

}  // namespace

void save_features(const FeatureGrid& features, const std::string& path) {
  auto out = open_output(path);
  out << kFeaturesMagic << '\n';
  write_grid(out, features.grid);
  out << "params," << features.style_count << ','
      << format_double(features.options.radius) << ','
      << (features.options.mode == FeatureMode::kHard ? "hard" : "exp") << ','
      << format_double(features.options.beta) << ',' << features.options.min_support << '\n';
  for (int i = 0; i < static_cast<int>(features.cells.size()); ++i) {
    const auto& cell = features.cells[static_cast<std::size_t>(i)];
    if (!cell) continue;
    const auto index = features.grid.cell_at(i);
    out << "feature," << index.col << ',' << index.row << ',' << cell->support << ','
        << format_double(cell->effective_location.lon) << ','
        << format_double(cell->effective_location.lat);
    for (double v : cell->histogram.values) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

FeatureGrid load_features(const std::string& path) {
  auto in = open_input(path);
  expect_magic(in, path, kFeaturesMagic);

  FeatureGrid features;
  bool have_grid = false, have_params = false;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields[0] == "grid") {
      features.grid = read_grid(fields, path);
      have_grid = true;
      features.cells.assign(static_cast<std::size_t>(features.grid.cell_count()), std::nullopt);
    } else if (fields[0] == "params") {
      if (fields.size() != 6) throw DataError(path + ": malformed params line");
      const auto k = parse_int(fields[1]);
      const auto radius = parse_double(fields[2]);
      const auto beta = parse_double(fields[4]);
      const auto min_support = parse_int(fields[5]);
      if (!k || !radius || !beta || !min_support || (fields[3] != "hard" && fields[3] != "exp")) {
        throw DataError(path + ": malformed params line");
      }
      features.style_count = static_cast<int>(*k);
      features.options.radius = *radius;
      features.options.mode = fields[3] == "hard" ? FeatureMode::kHard : FeatureMode::kExponential;
      features.options.beta = *beta;
      features.options.min_support = static_cast<int>(*min_support);
      have_params = true;
    } else if (fields[0] == "feature") {
      if (!have_grid || !have_params) throw DataError(path + ": feature before headers");
      if (fields.size() != 6 + static_cast<std::size_t>(features.style_count)) {
        throw DataError(path + ": feature line has wrong arity");
      }
      const auto col = parse_int(fields[1]);
      const auto row = parse_int(fields[2]);
      const auto support = parse_int(fields[3]);
      const auto lon = parse_double(fields[4]);
      const auto lat = parse_double(fields[5]);
      if (!col || !row || !support || !lon || !lat) {
        throw DataError(path + ": malformed feature line");
      }
      const CellIndex cell{static_cast<int>(*col), static_cast<int>(*row)};
      if (cell.col < 0 || cell.col >= features.grid.n_cols || cell.row < 0 ||
          cell.row >= features.grid.n_rows) {
        throw DataError(path + ": feature cell outside grid");
      }
      LocationFeature feature;
      feature.location = features.grid.location(cell);
      feature.support = *support;
      feature.effective_location = {*lon, *lat};
      feature.histogram.support = *support;
      feature.histogram.values.reserve(static_cast<std::size_t>(features.style_count));
      for (std::size_t f = 6; f < fields.size(); ++f) {
        const auto v = parse_double(fields[f]);
        if (!v) throw DataError(path + ": malformed histogram value");
        feature.histogram.values.push_back(*v);
      }
      features.cells[static_cast<std::size_t>(features.grid.flat_index(cell))] =
          std::move(feature);
    } else {
      throw DataError(path + ": unknown line kind '" + std::string(fields[0]) + "'");
    }
  }
  if (!have_grid || !have_params) throw DataError(path + ": incomplete feature file");
  return features;
}

void save_map(const NeighborhoodMap& map, const std::string& path) {
  auto out = open_output(path);
  out << kMapMagic << '\n';
  write_grid(out, map.grid);
  out << "params," << map.centroids.size() << ',' << map.style_count << '\n';
  out << "inertia," << format_double(map.inertia) << '\n';
  for (std::size_t c = 0; c < map.centroids.size(); ++c) {
    out << "centroid," << c;
    for (double v : map.centroids[c]) out << ',' << format_double(v);
    out << '\n';
  }
  for (int i = 0; i < static_cast<int>(map.labels.size()); ++i) {
    const int label = map.labels[static_cast<std::size_t>(i)];
    if (label == kUnassignedCell) continue;
    const auto cell = map.grid.cell_at(i);
    out << "cell," << cell.col << ',' << cell.row << ',' << label << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

NeighborhoodMap load_map(const std::string& path) {
  auto in = open_input(path);
  expect_magic(in, path, kMapMagic);

  NeighborhoodMap map;
  bool have_grid = false;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields[0] == "grid") {
      map.grid = read_grid(fields, path);
      have_grid = true;
      map.labels.assign(static_cast<std::size_t>(map.grid.cell_count()), kUnassignedCell);
    } else if (fields[0] == "params") {
      if (fields.size() != 3) throw DataError(path + ": malformed params line");
      const auto clusters = parse_int(fields[1]);
      const auto styles = parse_int(fields[2]);
      if (!clusters || !styles) throw DataError(path + ": malformed params line");
      map.centroids.resize(static_cast<std::size_t>(*clusters));
      map.style_count = static_cast<int>(*styles);
    } else if (fields[0] == "inertia") {
      if (fields.size() != 2) throw DataError(path + ": malformed inertia line");
      const auto v = parse_double(fields[1]);
      if (!v) throw DataError(path + ": malformed inertia line");
      map.inertia = *v;
    } else if (fields[0] == "centroid") {
      if (fields.size() < 2) throw DataError(path + ": malformed centroid line");
      const auto c = parse_int(fields[1]);
      if (!c || *c < 0 || *c >= static_cast<std::int64_t>(map.centroids.size())) {
        throw DataError(path + ": centroid index out of range");
      }
      auto& centroid = map.centroids[static_cast<std::size_t>(*c)];
      for (std::size_t f = 2; f < fields.size(); ++f) {
        const auto v = parse_double(fields[f]);
        if (!v) throw DataError(path + ": malformed centroid value");
        centroid.push_back(*v);
      }
    } else if (fields[0] == "cell") {
      if (!have_grid) throw DataError(path + ": cell before grid header");
      if (fields.size() != 4) throw DataError(path + ": malformed cell line");
      const auto col = parse_int(fields[1]);
      const auto row = parse_int(fields[2]);
      const auto label = parse_int(fields[3]);
      if (!col || !row || !label || *label < 0) throw DataError(path + ": malformed cell line");
      if (!map.centroids.empty() &&
          *label >= static_cast<std::int64_t>(map.centroids.size())) {
        throw DataError(path + ": cell label exceeds centroid count");
      }
      const CellIndex cell{static_cast<int>(*col), static_cast<int>(*row)};
      if (cell.col < 0 || cell.col >= map.grid.n_cols || cell.row < 0 ||
          cell.row >= map.grid.n_rows) {
        throw DataError(path + ": cell outside grid");
      }
      map.labels[static_cast<std::size_t>(map.grid.flat_index(cell))] =
          static_cast<int>(*label);
    } else {
      throw DataError(path + ": unknown line kind '" + std::string(fields[0]) + "'");
    }
  }
  if (!have_grid) throw DataError(path + ": incomplete map file");
  return map;
}

std::string export_geojson(const NeighborhoodMap& map,
                           const std::vector<std::vector<int>>& top_styles) {
  nlohmann::ordered_json doc;
  doc["type"] = "FeatureCollection";
  auto& features = doc["features"];
  features = nlohmann::ordered_json::array();

  const auto& grid = map.grid;
  const double d = grid.spacing;
  for (int i = 0; i < static_cast<int>(map.labels.size()); ++i) {
    const int label = map.labels[static_cast<std::size_t>(i)];
    if (label == kUnassignedCell) continue;
    const auto cell = grid.cell_at(i);
    const auto sw = grid.location(cell);

    nlohmann::ordered_json feature;
    feature["type"] = "Feature";
    feature["properties"]["label"] = label;
    feature["properties"]["col"] = cell.col;
    feature["properties"]["row"] = cell.row;
    if (static_cast<std::size_t>(label) < top_styles.size()) {
      feature["properties"]["top_styles"] = top_styles[static_cast<std::size_t>(label)];
    }
    feature["geometry"]["type"] = "Polygon";
    feature["geometry"]["coordinates"] = nlohmann::ordered_json::array({
        nlohmann::ordered_json::array({
            nlohmann::ordered_json::array({sw.lon, sw.lat}),
            nlohmann::ordered_json::array({sw.lon + d, sw.lat}),
            nlohmann::ordered_json::array({sw.lon + d, sw.lat + d}),
            nlohmann::ordered_json::array({sw.lon, sw.lat + d}),
            nlohmann::ordered_json::array({sw.lon, sw.lat}),
        }),
    });
    features.push_back(std::move(feature));
  }
  return doc.dump(2) + "\n";
}

}  // namespace undermap
