#include "undermap/geodata.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "text.hpp"

namespace undermap {

namespace {

using detail::format_double;
using detail::parse_double;
using detail::parse_int;
using detail::split;
using detail::trim;

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

bool skippable(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

}  // namespace

double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw UsageError("l1_distance: dimension mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
  return total;
}

CityDataset load_records(const std::string& path, int style_count) {
  if (style_count <= 0) throw UsageError("style_count must be positive");
  auto in = open_input(path);

  CityDataset dataset;
  dataset.city_name = std::filesystem::path(path).stem().string();
  dataset.style_count = style_count;

  std::string line;
  std::int64_t line_no = 0;

  // Header: must name the four fields, any order; extra columns ignored.
  int col_id = -1, col_lat = -1, col_lon = -1, col_style = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto fields = split(line);
    for (int i = 0; i < static_cast<int>(fields.size()); ++i) {
      if (fields[i] == "id") col_id = i;
      else if (fields[i] == "lat") col_lat = i;
      else if (fields[i] == "lon") col_lon = i;
      else if (fields[i] == "style") col_style = i;
    }
    if (col_id < 0 || col_lat < 0 || col_lon < 0 || col_style < 0) {
      throw DataError(path + ": first line must be a header naming id,lat,lon,style");
    }
    break;
  }

  const std::size_t min_cols = static_cast<std::size_t>(
      std::max({col_id, col_lat, col_lon, col_style}) + 1);

  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto fields = split(line);
    if (fields.size() < min_cols) {
      ++dataset.skipped_lines;
      continue;
    }
    const auto lat = parse_double(fields[col_lat]);
    const auto lon = parse_double(fields[col_lon]);
    const auto style = parse_int(fields[col_style]);
    if (!lat || !lon || !style || fields[col_id].empty() ||
        *lat < -90.0 || *lat > 90.0 || *lon < -180.0 || *lon > 180.0) {
      ++dataset.skipped_lines;
      continue;
    }
    if (*style < 0 || *style >= style_count) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": style id " << *style
          << " outside [0, " << style_count << ")";
      throw DataError(msg.str());
    }
    dataset.records.push_back(StyleRecord{std::string(fields[col_id]), *lat, *lon,
                                          static_cast<int>(*style)});
  }

  if (dataset.records.empty()) throw DataError(path + ": no valid records");
  return dataset;
}

void save_records(const CityDataset& dataset, const std::string& path) {
  auto out = open_output(path);
  out << "id,lat,lon,style\n";
  for (const auto& r : dataset.records) {
    out << r.id << ',' << format_double(r.lat) << ',' << format_double(r.lon)
        << ',' << r.style_id << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

BoundingBox bounding_box(const CityDataset& dataset, double degenerate_pad) {
  if (dataset.records.empty()) throw UsageError("bounding_box: empty dataset");
  if (degenerate_pad <= 0.0) throw UsageError("bounding_box: pad must be positive");

  double min_lon = dataset.records.front().lon, max_lon = min_lon;
  double min_lat = dataset.records.front().lat, max_lat = min_lat;
  for (const auto& r : dataset.records) {
    min_lon = std::min(min_lon, r.lon);
    max_lon = std::max(max_lon, r.lon);
    min_lat = std::min(min_lat, r.lat);
    max_lat = std::max(max_lat, r.lat);
  }

  BoundingBox box{min_lon, min_lat, max_lon - min_lon, max_lat - min_lat};
  if (box.width <= 0.0) {
    box.w -= degenerate_pad / 2.0;
    box.width = degenerate_pad;
  }
  if (box.height <= 0.0) {
    box.s -= degenerate_pad / 2.0;
    box.height = degenerate_pad;
  }
  return box;
}

LabelGrid load_label_grid(const std::string& path) {
  auto in = open_input(path);

  LabelGrid grid;
  bool have_origin = false;
  bool have_granularity = false;
  std::unordered_map<std::string, int> name_to_id;

  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto fields = split(line);
    const auto fail = [&](const std::string& what) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": " << what;
      return DataError(msg.str());
    };

    if (fields[0] == "origin") {
      if (fields.size() != 3) throw fail("origin needs lon,lat");
      const auto lon = parse_double(fields[1]);
      const auto lat = parse_double(fields[2]);
      if (!lon || !lat) throw fail("bad origin coordinates");
      grid.origin_lon = *lon;
      grid.origin_lat = *lat;
      have_origin = true;
    } else if (fields[0] == "granularity") {
      if (fields.size() != 2) throw fail("granularity needs one value");
      const auto g = parse_double(fields[1]);
      if (!g || *g <= 0.0) throw fail("granularity must be positive");
      if (have_granularity && *g != grid.granularity) {
        throw fail("inconsistent granularity declaration");
      }
      grid.granularity = *g;
      have_granularity = true;
    } else if (fields[0] == "label") {
      if (fields.size() != 2 || fields[1].empty()) throw fail("label needs a name");
      const std::string name(fields[1]);
      if (!name_to_id.contains(name)) {
        name_to_id.emplace(name, static_cast<int>(grid.label_names.size()));
        grid.label_names.push_back(name);
      }
    } else if (fields[0] == "cell") {
      if (fields.size() != 4) throw fail("cell needs col,row,label_id");
      const auto col = parse_int(fields[1]);
      const auto row = parse_int(fields[2]);
      const auto label = parse_int(fields[3]);
      if (!col || !row || !label) throw fail("bad cell entry");
      if (*label < 0 || *label >= static_cast<std::int64_t>(grid.label_names.size())) {
        throw fail("unknown label id " + std::to_string(*label));
      }
      grid.cells[CellIndex{static_cast<int>(*col), static_cast<int>(*row)}] =
          static_cast<int>(*label);
    } else {
      throw fail("unknown line kind '" + std::string(fields[0]) + "'");
    }
  }

  if (!have_origin || !have_granularity) {
    throw DataError(path + ": missing origin or granularity header");
  }
  if (grid.cells.empty()) throw DataError(path + ": benchmark has no cells");
  return grid;
}

void save_label_grid(const LabelGrid& grid, const std::string& path) {
  auto out = open_output(path);
  out << "origin," << format_double(grid.origin_lon) << ','
      << format_double(grid.origin_lat) << '\n';
  out << "granularity," << format_double(grid.granularity) << '\n';
  for (const auto& name : grid.label_names) out << "label," << name << '\n';
  for (const auto& [cell, label] : grid.cells) {
    out << "cell," << cell.col << ',' << cell.row << ',' << label << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace undermap
