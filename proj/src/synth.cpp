#include "undermap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "undermap/featurize.hpp"
#include "undermap/rng.hpp"

namespace undermap {

namespace {

bool rects_overlap(const Rect& a, const Rect& b) {
  return a.w < b.w + b.width && b.w < a.w + a.width &&
         a.s < b.s + b.height && b.s < a.s + a.height;
}

void check_distribution(const std::vector<double>& dist, int style_count) {
  if (static_cast<int>(dist.size()) != style_count) {
    throw UsageError("synth: distribution length differs from style count");
  }
  double sum = 0.0;
  for (double v : dist) {
    if (v < -1e-12) throw UsageError("synth: negative distribution entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw UsageError("synth: distribution does not sum to 1");
}

LonLat sample_point(const PlantedRegionSpec& region, Rng& rng) {
  // Rect chosen proportionally to area, then uniform within it.
  double total = 0.0;
  for (const auto& rect : region.rects) total += rect.area();
  double target = rng.uniform01() * total;
  const Rect* chosen = &region.rects.back();
  for (const auto& rect : region.rects) {
    target -= rect.area();
    if (target < 0.0) {
      chosen = &rect;
      break;
    }
  }
  return {rng.uniform(chosen->w, chosen->w + chosen->width),
          rng.uniform(chosen->s, chosen->s + chosen->height)};
}

int sample_style(const std::vector<double>& cumulative, Rng& rng) {
  const double target = rng.uniform01();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                                   static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
}

std::vector<Rect> quadrant_rects(const BoundingBox& bbox, double gap) {
  const double quad_w = (bbox.width - gap) / 2.0;
  const double quad_h = (bbox.height - gap) / 2.0;
  if (quad_w <= 0.0 || quad_h <= 0.0) {
    throw UsageError("synth: bounding box too small for four separated quadrants");
  }
  const double east = bbox.w + quad_w + gap;
  const double north = bbox.s + quad_h + gap;
  return {
      Rect{bbox.w, bbox.s, quad_w, quad_h},  // SW
      Rect{east, bbox.s, quad_w, quad_h},    // SE
      Rect{east, north, quad_w, quad_h},     // NE
      Rect{bbox.w, north, quad_w, quad_h},   // NW
  };
}

constexpr double kRegionGap = 0.03;

}  // namespace

void validate(const PlantedCity& spec) {
  if (spec.style_count <= 0) throw UsageError("synth: style count must be positive");
  if (spec.cell_spacing <= 0.0) throw UsageError("synth: cell spacing must be positive");
  if (spec.regions.empty()) throw UsageError("synth: no regions");
  if (spec.bbox.width <= 0.0 || spec.bbox.height <= 0.0) {
    throw UsageError("synth: bounding box must have positive extent");
  }
  for (const auto& region : spec.regions) {
    if (region.rects.empty()) throw UsageError("synth: region without rectangles");
    if (region.density <= 0.0) throw UsageError("synth: density must be positive");
    if (region.label.empty()) throw UsageError("synth: region without label");
    check_distribution(region.style_distribution, spec.style_count);
    for (const auto& rect : region.rects) {
      if (rect.width <= 0.0 || rect.height <= 0.0) {
        throw UsageError("synth: degenerate rectangle");
      }
      if (rect.w < spec.bbox.w - 1e-12 || rect.s < spec.bbox.s - 1e-12 ||
          rect.w + rect.width > spec.bbox.east() + 1e-12 ||
          rect.s + rect.height > spec.bbox.north() + 1e-12) {
        throw UsageError("synth: rectangle outside bounding box");
      }
    }
  }
  for (std::size_t i = 0; i < spec.regions.size(); ++i) {
    for (std::size_t j = i + 1; j < spec.regions.size(); ++j) {
      for (const auto& a : spec.regions[i].rects) {
        for (const auto& b : spec.regions[j].rects) {
          if (rects_overlap(a, b)) throw UsageError("synth: regions overlap");
        }
      }
    }
  }
}

std::optional<int> region_at(const PlantedCity& spec, const LonLat& p) {
  for (std::size_t i = 0; i < spec.regions.size(); ++i) {
    for (const auto& rect : spec.regions[i].rects) {
      if (rect.contains(p)) return static_cast<int>(i);
    }
  }
  return std::nullopt;
}

GeneratedCity generate_city(const PlantedCity& spec, std::uint64_t seed,
                            double truth_granularity) {
  validate(spec);
  if (truth_granularity <= 0.0) throw UsageError("synth: granularity must be positive");

  Rng rng(seed);
  GeneratedCity out;
  out.dataset.city_name = spec.name;
  out.dataset.style_count = spec.style_count;

  std::int64_t next_id = 0;
  for (const auto& region : spec.regions) {
    double area = 0.0;
    for (const auto& rect : region.rects) area += rect.area();
    const double rate = region.density * area / (spec.cell_spacing * spec.cell_spacing);
    const std::int64_t count = rng.poisson(rate);

    std::vector<double> cumulative(region.style_distribution.size());
    double running = 0.0;
    for (std::size_t k = 0; k < cumulative.size(); ++k) {
      running += region.style_distribution[k];
      cumulative[k] = running;
    }

    for (std::int64_t i = 0; i < count; ++i) {
      const LonLat p = sample_point(region, rng);
      out.dataset.records.push_back(StyleRecord{"r" + std::to_string(next_id++), p.lat, p.lon,
                                                sample_style(cumulative, rng)});
    }
  }
  if (out.dataset.records.empty()) throw DataError("synth: generated zero records");

  // Ground truth at the evaluation granularity; one class per distinct
  // region label, in region order.
  out.truth.origin_lon = spec.bbox.w;
  out.truth.origin_lat = spec.bbox.s;
  out.truth.granularity = truth_granularity;
  std::map<std::string, int> class_ids;
  std::vector<int> region_class(spec.regions.size());
  for (std::size_t i = 0; i < spec.regions.size(); ++i) {
    const auto& label = spec.regions[i].label;
    const auto it = class_ids.find(label);
    if (it == class_ids.end()) {
      region_class[i] = static_cast<int>(out.truth.label_names.size());
      class_ids.emplace(label, region_class[i]);
      out.truth.label_names.push_back(label);
    } else {
      region_class[i] = it->second;
    }
  }

  const int n_cols = static_cast<int>(std::floor(spec.bbox.width / truth_granularity + kLatticeEps)) + 1;
  const int n_rows = static_cast<int>(std::floor(spec.bbox.height / truth_granularity + kLatticeEps)) + 1;
  for (int row = 0; row < n_rows; ++row) {
    for (int col = 0; col < n_cols; ++col) {
      const LonLat center{out.truth.origin_lon + (col + 0.5) * truth_granularity,
                          out.truth.origin_lat + (row + 0.5) * truth_granularity};
      const auto region = region_at(spec, center);
      if (region) {
        out.truth.cells[CellIndex{col, row}] = region_class[static_cast<std::size_t>(*region)];
      }
    }
  }
  return out;
}

PlantedCity planted_quadrants(const BoundingBox& bbox, int style_count, double density,
                              std::uint64_t seed, double dirichlet_alpha) {
  if (style_count < 2) throw UsageError("synth: need at least two styles");
  Rng rng(seed);

  std::vector<std::vector<double>> distributions;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    distributions.clear();
    for (int i = 0; i < 4; ++i) {
      distributions.push_back(rng.dirichlet(static_cast<std::size_t>(style_count),
                                            dirichlet_alpha));
    }
    double min_sep = 2.0;
    for (std::size_t i = 0; i < distributions.size(); ++i) {
      for (std::size_t j = i + 1; j < distributions.size(); ++j) {
        min_sep = std::min(min_sep, l1_distance(distributions[i], distributions[j]));
      }
    }
    if (min_sep >= 0.4) break;
  }

  PlantedCity city;
  city.name = "planted-quadrants";
  city.bbox = bbox;
  city.style_count = style_count;
  const auto rects = quadrant_rects(bbox, kRegionGap);
  for (int i = 0; i < 4; ++i) {
    city.regions.push_back(PlantedRegionSpec{{rects[static_cast<std::size_t>(i)]},
                                             distributions[static_cast<std::size_t>(i)],
                                             density,
                                             "region-" + std::to_string(i)});
  }
  validate(city);
  return city;
}

PlantedCity split_twin_spec(const BoundingBox& bbox, int style_count, double density,
                            std::uint64_t seed) {
  if (style_count < 6) throw UsageError("split_twin_spec: need at least six styles");
  Rng rng(seed);

  // 0.8 of the mass on two anchor styles, the rest uniform, plus a small
  // seeded jitter; the twin distribution is built once and shared.
  const auto concentrated = [&](int first_style, bool jitter) {
    std::vector<double> dist(static_cast<std::size_t>(style_count),
                             0.2 / static_cast<double>(style_count - 2));
    dist[static_cast<std::size_t>(first_style)] = 0.4;
    dist[static_cast<std::size_t>(first_style) + 1] = 0.4;
    if (jitter) {
      const auto noise = rng.dirichlet(static_cast<std::size_t>(style_count), 1.0);
      for (std::size_t k = 0; k < dist.size(); ++k) {
        dist[k] = 0.95 * dist[k] + 0.05 * noise[k];
      }
    }
    return dist;
  };

  const auto twin = concentrated(0, true);
  const auto filler_a = concentrated(2, true);
  const auto filler_b = concentrated(4, true);

  PlantedCity city;
  city.name = "split-twin";
  city.bbox = bbox;
  city.style_count = style_count;
  const auto rects = quadrant_rects(bbox, kRegionGap);
  city.regions = {
      PlantedRegionSpec{{rects[0]}, twin, density, "twin"},      // SW
      PlantedRegionSpec{{rects[1]}, filler_a, density, "filler-a"},  // SE
      PlantedRegionSpec{{rects[2]}, twin, density, "twin"},      // NE, diagonal from SW
      PlantedRegionSpec{{rects[3]}, filler_b, density, "filler-b"},  // NW
  };
  validate(city);
  return city;
}

std::pair<PlantedCity, PlantedCity> shifted_city_pair(const PlantedCity& base, double shift,
                                                      std::uint64_t seed) {
  const int k = base.style_count;
  if (k < 8 || k % 4 != 0) {
    throw UsageError("shifted_city_pair: style count must be a multiple of 4, at least 8");
  }
  if (shift <= 0.0) throw UsageError("shifted_city_pair: shift must be positive");
  const double uniform = 1.0 / static_cast<double>(k);
  // Worst-case total deviation below is (1 + 1.75) * shift per coordinate.
  if (uniform <= 2.75 * shift + 1e-9) {
    throw UsageError("shifted_city_pair: shift too large for this style count");
  }
  if (base.regions.empty()) throw UsageError("shifted_city_pair: base needs one region");
  const double density = base.regions.front().density;

  // Three balanced sign patterns from the order-4 Hadamard rows, tiled
  // across the styles; every pair has zero sign overlap. The base shift
  // rides on `s`, the analogy signal on `v`, and each city's filler
  // regions on a w pattern of their own (the middle tile flips in city B,
  // keeping filler encodings from colliding across cities).
  const auto tiled = [k](double b0, double b1, double b2, double b3, bool flip_middle) {
    std::vector<double> out(static_cast<std::size_t>(k));
    const double block[4] = {b0, b1, b2, b3};
    const int tiles = k / 4;
    for (int i = 0; i < k; ++i) {
      const int tile = i / 4;
      const bool flip = flip_middle && tile == tiles / 2;
      out[static_cast<std::size_t>(i)] = block[i % 4] * (flip ? -1.0 : 1.0);
    }
    return out;
  };
  const auto s_pattern = tiled(1, 1, -1, -1, false);
  const auto v_pattern = tiled(1, -1, 1, -1, false);

  // Special magnitudes differ across the cities (the signal is the shared
  // sign, not the size); the smaller one gets a seeded wobble.
  Rng rng(seed);
  const double confound_mag = 0.6 * shift;
  const double special_mag_a = 0.7 * shift;
  const double special_mag_b = (0.45 + 0.1 * rng.uniform01()) * shift;

  const auto build = [&](const std::string& name, double base_sign, double special_mag,
                         bool flip_w) {
    const auto w_pattern = tiled(1, -1, -1, 1, flip_w);
    // Filler deviations are w-dominated so their signs are exactly +/-w.
    const double filler_mag = (special_mag + confound_mag) / 2.0 + 0.45 * shift;

    std::vector<double> base_dist(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      base_dist[static_cast<std::size_t>(i)] =
          uniform + base_sign * shift * s_pattern[static_cast<std::size_t>(i)];
    }

    // confound drifts toward the other city's base; special carries the
    // shared sign pattern; the two fillers split the balancing mass so the
    // equal-weight city mean stays exactly at base_dist.
    std::vector<double> confound(base_dist), special(base_dist);
    std::vector<double> filler_a(base_dist), filler_b(base_dist);
    for (int i = 0; i < k; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      const double u = -base_sign * confound_mag * s_pattern[idx];
      const double v = special_mag * v_pattern[idx];
      const double w = filler_mag * w_pattern[idx];
      confound[idx] += u;
      special[idx] += v;
      filler_a[idx] += -0.5 * (u + v) + w;
      filler_b[idx] += -0.5 * (u + v) - w;
    }

    PlantedCity city;
    city.name = name;
    city.bbox = base.bbox;
    city.style_count = k;
    city.cell_spacing = base.cell_spacing;
    const double slab_h = (base.bbox.height - 3.0 * kRegionGap) / 4.0;
    if (slab_h <= 0.0) {
      throw UsageError("shifted_city_pair: bounding box too small for four regions");
    }
    const char* labels[] = {"confound", "filler-a", "filler-b", "special"};
    const std::vector<double>* dists[] = {&confound, &filler_a, &filler_b, &special};
    for (int j = 0; j < 4; ++j) {
      const Rect rect{base.bbox.w, base.bbox.s + j * (slab_h + kRegionGap), base.bbox.width,
                      slab_h};
      city.regions.push_back(PlantedRegionSpec{{rect}, *dists[j], density, labels[j]});
    }
    validate(city);
    return city;
  };

  return {build("city-a", +1.0, special_mag_a, false),
          build("city-b", -1.0, special_mag_b, true)};
}

}  // namespace undermap
