#pragma once

#include <string>

#include "undermap/types.hpp"

namespace undermap {

// Reads a record file (CSV with an `id,lat,lon,style` header, any column
// order). Malformed lines are skipped and counted; a style id outside
// [0, style_count) aborts with the offending line number.
CityDataset load_records(const std::string& path, int style_count);

void save_records(const CityDataset& dataset, const std::string& path);

// Tight closed bounds over all record locations. Zero-extent axes are
// widened to `degenerate_pad`, centered on the collapsed coordinate, so the
// sampling lattice always has at least one spacing to work with.
BoundingBox bounding_box(const CityDataset& dataset, double degenerate_pad = 0.01);

LabelGrid load_label_grid(const std::string& path);

void save_label_grid(const LabelGrid& grid, const std::string& path);

}  // namespace undermap
