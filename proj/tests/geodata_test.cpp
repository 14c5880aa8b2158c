#include "undermap/geodata.hpp"

#include <random>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "support.hpp"
#include "undermap/cluster.hpp"
#include "undermap/serialize.hpp"

using namespace undermap;
using testsupport::TempDir;
using testsupport::write_file;

TEST_CASE("load_records parses well-formed files") {
  TempDir dir("records");
  const auto path = dir.file("city.csv");
  write_file(path,
             "id,lat,lon,style\n"
             "a,40.7,-74.0,3\n"
             "b,40.8,-74.1,399\n"
             "c,40.9,-74.2,0\n");
  const auto dataset = load_records(path, 400);
  CHECK(dataset.records.size() == 3);
  CHECK(dataset.style_count == 400);
  CHECK(dataset.skipped_lines == 0);
  CHECK(dataset.records[0].id == "a");
  CHECK(dataset.records[1].style_id == 399);
}

TEST_CASE("load_records accepts reordered columns") {
  TempDir dir("records");
  const auto path = dir.file("city.csv");
  write_file(path, "style,lon,id,lat\n7,-74.0,a,40.7\n");
  const auto dataset = load_records(path, 8);
  CHECK(dataset.records.size() == 1);
  CHECK(dataset.records[0].style_id == 7);
  CHECK(dataset.records[0].lon == -74.0);
}

TEST_CASE("load_records hard-errors on out-of-range style id") {
  TempDir dir("records");
  const auto path = dir.file("city.csv");
  write_file(path, "id,lat,lon,style\na,40.7,-74.0,400\n");
  CHECK_THROWS_WITH_AS(load_records(path, 400), doctest::Contains(":2:"), DataError);
}

TEST_CASE("load_records skips malformed lines with a counter") {
  TempDir dir("records");
  const auto path = dir.file("city.csv");
  write_file(path,
             "id,lat,lon,style\n"
             "a,40.7,-74.0,1\n"
             "broken line\n"
             "b,not-a-number,-74.0,1\n"
             "c,95.0,-74.0,1\n"      // latitude out of range
             "d,40.7,-74.0,1\n");
  const auto dataset = load_records(path, 4);
  CHECK(dataset.records.size() == 2);
  CHECK(dataset.skipped_lines == 3);
}

TEST_CASE("load_records error paths") {
  TempDir dir("records");
  CHECK_THROWS_AS(load_records(dir.file("missing.csv"), 4), DataError);

  const auto headerless = dir.file("headerless.csv");
  write_file(headerless, "a,40.7,-74.0,1\n");
  CHECK_THROWS_AS(load_records(headerless, 4), DataError);

  const auto empty = dir.file("empty.csv");
  write_file(empty, "id,lat,lon,style\n");
  CHECK_THROWS_AS(load_records(empty, 4), DataError);
}

TEST_CASE("load_records handles a GeoStyle-sized city without truncation") {
  TempDir dir("records");
  const auto path = dir.file("big.csv");
  std::ostringstream out;
  out << "id,lat,lon,style\n";
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> jitter(0.0, 0.2);
  for (int i = 0; i < 175000; ++i) {
    out << 'r' << i << ',' << 40.0 + jitter(rng) << ',' << -74.0 + jitter(rng) << ','
        << (i % 400) << '\n';
  }
  write_file(path, out.str());
  const auto dataset = load_records(path, 400);
  CHECK(dataset.records.size() == 175000);
}

TEST_CASE("records round-trip through save and load") {
  TempDir dir("records");
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::vector<StyleRecord> records;
  for (int i = 0; i < 200; ++i) {
    records.push_back(
        StyleRecord{"id" + std::to_string(i), coord(rng) * 80, coord(rng) * 170,
                    static_cast<int>(rng() % 16)});
  }
  const auto dataset = testsupport::make_dataset(records, 16);
  const auto path = dir.file("roundtrip.csv");
  save_records(dataset, path);
  const auto loaded = load_records(path, 16);
  CHECK(loaded.records == dataset.records);
  CHECK(loaded.skipped_lines == 0);
}

TEST_CASE("bounding_box spans the min/max corners") {
  const auto dataset = testsupport::make_dataset(
      {{"a", 0.0, 0.0, 0}, {"b", 0.03, 0.05, 0}}, 1);
  const auto box = bounding_box(dataset);
  CHECK(box.w == 0.0);
  CHECK(box.s == 0.0);
  CHECK(box.width == doctest::Approx(0.05));
  CHECK(box.height == doctest::Approx(0.03));
}

TEST_CASE("bounding_box widens degenerate extents around the point") {
  const auto dataset = testsupport::make_dataset({{"a", 40.0, -74.0, 0}}, 1);
  const auto box = bounding_box(dataset, 0.01);
  CHECK(box.width == doctest::Approx(0.01));
  CHECK(box.height == doctest::Approx(0.01));
  CHECK(box.w == doctest::Approx(-74.005));
  CHECK(box.s == doctest::Approx(39.995));
  CHECK(box.contains({-74.0, 40.0}));

  CHECK_THROWS_AS(bounding_box(testsupport::make_dataset({}, 1)), UsageError);
}

TEST_CASE("bounding_box contains every record") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lon(10.0, 11.0), lat(40.0, 41.0);
  std::vector<StyleRecord> records;
  for (int i = 0; i < 1000; ++i) {
    records.push_back(StyleRecord{std::to_string(i), lat(rng), lon(rng), 0});
  }
  const auto dataset = testsupport::make_dataset(records, 1);
  const auto box = bounding_box(dataset);
  CHECK(box.w >= 10.0);
  CHECK(box.east() <= 11.0);
  CHECK(box.s >= 40.0);
  CHECK(box.north() <= 41.0);
  for (const auto& r : dataset.records) {
    CHECK(box.contains({r.lon, r.lat}));
  }
}

namespace {

LabelGrid sample_grid() {
  LabelGrid grid;
  grid.origin_lon = -74.05;
  grid.origin_lat = 40.55;
  grid.granularity = 0.01;
  grid.label_names = {"wealthy", "hipster", "tourist", "student", "normie", "corporate"};
  grid.cells[{0, 0}] = 2;
  grid.cells[{1, 0}] = 2;
  grid.cells[{0, 1}] = 5;
  grid.cells[{3, 7}] = 0;
  return grid;
}

}  // namespace

TEST_CASE("label grid round-trips and keeps six labels") {
  TempDir dir("labels");
  const auto grid = sample_grid();
  const auto path = dir.file("grid.csv");
  save_label_grid(grid, path);
  const auto loaded = load_label_grid(path);
  CHECK(loaded == grid);
  CHECK(loaded.label_names.size() == 6);
}

TEST_CASE("label grid loader deduplicates names in first-appearance order") {
  TempDir dir("labels");
  const auto path = dir.file("grid.csv");
  write_file(path,
             "origin,0,0\n"
             "granularity,0.01\n"
             "label,alpha\n"
             "label,beta\n"
             "label,alpha\n"
             "cell,0,0,1\n");
  const auto grid = load_label_grid(path);
  CHECK(grid.label_names == std::vector<std::string>{"alpha", "beta"});
  CHECK(grid.cells.at({0, 0}) == 1);
}

TEST_CASE("label grid loader rejects bad files") {
  TempDir dir("labels");

  const auto no_cells = dir.file("nocells.csv");
  write_file(no_cells, "origin,0,0\ngranularity,0.01\nlabel,a\n");
  CHECK_THROWS_AS(load_label_grid(no_cells), DataError);

  const auto unknown_label = dir.file("unknown.csv");
  write_file(unknown_label, "origin,0,0\ngranularity,0.01\nlabel,a\ncell,0,0,1\n");
  CHECK_THROWS_AS(load_label_grid(unknown_label), DataError);

  const auto inconsistent = dir.file("inconsistent.csv");
  write_file(inconsistent,
             "origin,0,0\ngranularity,0.01\ngranularity,0.02\nlabel,a\ncell,0,0,0\n");
  CHECK_THROWS_AS(load_label_grid(inconsistent), DataError);

  CHECK_THROWS_AS(load_label_grid(dir.file("missing.csv")), DataError);
}

TEST_CASE("geojson export emits one square per assigned cell") {
  GridSpec grid = GridSpec::make(BoundingBox{10.0, 45.0, 0.01, 0.01}, 0.01);
  REQUIRE(grid.cell_count() == 4);

  NeighborhoodMap map;
  map.grid = grid;
  map.style_count = 2;
  map.labels = {0, 0, 0, 0};

  const auto text = export_geojson(map);
  const auto doc = nlohmann::json::parse(text);
  CHECK(doc["type"] == "FeatureCollection");
  REQUIRE(doc["features"].size() == 4);
  for (const auto& feature : doc["features"]) {
    CHECK(feature["properties"]["label"] == 0);
    CHECK(feature["geometry"]["type"] == "Polygon");
  }

  // Corners of cell (i, j) run from (w + d*i, s + d*j) to (w + d*(i+1), s + d*(j+1)).
  const auto& ring = doc["features"][1]["geometry"]["coordinates"][0];
  CHECK(doc["features"][1]["properties"]["col"] == 1);
  CHECK(doc["features"][1]["properties"]["row"] == 0);
  CHECK(ring[0][0].get<double>() == doctest::Approx(10.01));
  CHECK(ring[0][1].get<double>() == doctest::Approx(45.0));
  CHECK(ring[2][0].get<double>() == doctest::Approx(10.02));
  CHECK(ring[2][1].get<double>() == doctest::Approx(45.01));
  CHECK(ring.size() == 5);
}

TEST_CASE("geojson export omits unassigned cells and carries top styles") {
  GridSpec grid = GridSpec::make(BoundingBox{0.0, 0.0, 0.01, 0.01}, 0.01);
  NeighborhoodMap map;
  map.grid = grid;
  map.style_count = 3;
  map.labels = {0, kUnassignedCell, 1, 0};
  map.centroids = {{0.2, 0.5, 0.3}, {0.7, 0.1, 0.2}};

  const auto doc = nlohmann::json::parse(export_geojson(map, top_styles(map, 2)));
  REQUIRE(doc["features"].size() == 3);
  for (const auto& feature : doc["features"]) {
    const bool unassigned_cell =
        feature["properties"]["col"] == 1 && feature["properties"]["row"] == 0;
    CHECK_FALSE(unassigned_cell);
  }
  CHECK(doc["features"][1]["properties"]["label"] == 1);
  CHECK(doc["features"][1]["properties"]["top_styles"] ==
        nlohmann::json::array({0, 2}));
}
