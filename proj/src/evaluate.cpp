#include "undermap/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "undermap/rng.hpp"

namespace undermap {

namespace {

// Maps arbitrary label ids onto dense 0..n-1 in order of first appearance.
std::vector<int> compact(const std::vector<int>& labels, int& n_out) {
  std::map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int label : labels) {
    auto [it, inserted] = remap.emplace(label, static_cast<int>(remap.size()));
    out.push_back(it->second);
  }
  n_out = static_cast<int>(remap.size());
  return out;
}

double entropy(const std::vector<std::int64_t>& totals, std::int64_t n) {
  double h = 0.0;
  for (auto count : totals) {
    if (count <= 0) continue;
    const double p = static_cast<double>(count) / static_cast<double>(n);
    h -= p * std::log(p);
  }
  return h;
}

// True when the two labelings induce the same partition (the contingency
// matrix is a permutation-like one-nonzero-per-row-and-column pattern).
bool identical_partitions(const ContingencyTable& table) {
  for (const auto& row : table.counts) {
    int nonzero = 0;
    for (auto c : row) nonzero += (c > 0) ? 1 : 0;
    if (nonzero > 1) return false;
  }
  for (std::size_t j = 0; j < table.col_totals.size(); ++j) {
    int nonzero = 0;
    for (const auto& row : table.counts) nonzero += (row[j] > 0) ? 1 : 0;
    if (nonzero > 1) return false;
  }
  return true;
}

NeighborhoodMap map_from_labels(const FeatureGrid& features, const std::vector<int>& assigned,
                                const std::vector<int>& labels, double inertia) {
  NeighborhoodMap map;
  map.grid = features.grid;
  map.style_count = features.style_count;
  map.labels.assign(static_cast<std::size_t>(features.grid.cell_count()), kUnassignedCell);
  for (std::size_t i = 0; i < assigned.size(); ++i) {
    map.labels[static_cast<std::size_t>(assigned[i])] = labels[i];
  }
  map.inertia = inertia;
  return map;
}

NeighborhoodMap geometric_baseline(const FeatureGrid& features, int n_clusters,
                                   std::uint64_t seed, const KMeansOptions& options,
                                   bool with_density) {
  const auto assigned = features.assigned_indices();
  if (static_cast<int>(assigned.size()) < n_clusters) {
    throw UsageError("baseline: fewer assigned cells than clusters");
  }
  const auto points = baseline_features(features, with_density);
  KMeansOptions opts = options;
  opts.update_rule = UpdateRule::kMean;
  const auto result = kmeans(points, n_clusters, seed, Metric::kL2Squared, opts,
                             /*renormalize_centroids=*/false);
  return map_from_labels(features, assigned, result.labels, result.inertia);
}

}  // namespace

AlignedLabels align_to_benchmark(const NeighborhoodMap& map, const LabelGrid& benchmark) {
  const double d = map.grid.spacing;
  const double g = benchmark.granularity;
  const double ratio = g >= d ? g / d : d / g;
  if (std::abs(ratio - std::round(ratio)) > 1e-6 * std::max(1.0, ratio)) {
    throw UsageError("align_to_benchmark: granularities are not an integer ratio");
  }

  AlignedLabels aligned;
  std::vector<bool> hit(map.labels.size(), false);
  for (const auto& [cell, truth_label] : benchmark.cells) {
    const LonLat center{benchmark.origin_lon + (cell.col + 0.5) * g,
                        benchmark.origin_lat + (cell.row + 0.5) * g};
    const auto map_cell = map.grid.cell_containing(center);
    if (!map_cell) {
      ++aligned.dropped_benchmark;
      continue;
    }
    const auto flat = static_cast<std::size_t>(map.grid.flat_index(*map_cell));
    const int predicted = map.labels[flat];
    if (predicted == kUnassignedCell) {
      ++aligned.dropped_benchmark;
      continue;
    }
    hit[flat] = true;
    aligned.predicted.push_back(predicted);
    aligned.truth.push_back(truth_label);
  }
  for (std::size_t i = 0; i < map.labels.size(); ++i) {
    if (map.labels[i] != kUnassignedCell && !hit[i]) ++aligned.dropped_map;
  }
  return aligned;
}

ContingencyTable ContingencyTable::build(const std::vector<int>& predicted,
                                         const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) {
    throw UsageError("contingency: length mismatch");
  }
  if (predicted.empty()) throw UsageError("contingency: empty pairs");

  ContingencyTable table;
  int n_pred = 0, n_truth = 0;
  const auto p = compact(predicted, n_pred);
  const auto t = compact(truth, n_truth);

  table.counts.assign(static_cast<std::size_t>(n_pred),
                      std::vector<std::int64_t>(static_cast<std::size_t>(n_truth), 0));
  table.row_totals.assign(static_cast<std::size_t>(n_pred), 0);
  table.col_totals.assign(static_cast<std::size_t>(n_truth), 0);
  table.total = static_cast<std::int64_t>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    table.counts[static_cast<std::size_t>(p[i])][static_cast<std::size_t>(t[i])] += 1;
    table.row_totals[static_cast<std::size_t>(p[i])] += 1;
    table.col_totals[static_cast<std::size_t>(t[i])] += 1;
  }
  return table;
}

double nmi(const AlignedLabels& pairs) {
  const auto table = ContingencyTable::build(pairs.predicted, pairs.truth);
  if (identical_partitions(table)) return 1.0;

  const double h_pred = entropy(table.row_totals, table.total);
  const double h_truth = entropy(table.col_totals, table.total);
  if (h_pred == 0.0 || h_truth == 0.0) return 0.0;

  double mi = 0.0;
  const auto n = static_cast<double>(table.total);
  for (std::size_t i = 0; i < table.counts.size(); ++i) {
    for (std::size_t j = 0; j < table.counts[i].size(); ++j) {
      const auto joint = table.counts[i][j];
      if (joint <= 0) continue;
      const double pij = static_cast<double>(joint) / n;
      const double pi = static_cast<double>(table.row_totals[i]) / n;
      const double pj = static_cast<double>(table.col_totals[j]) / n;
      mi += pij * std::log(pij / (pi * pj));
    }
  }
  return std::clamp(mi / std::sqrt(h_pred * h_truth), 0.0, 1.0);
}

double purity(const AlignedLabels& pairs) {
  const auto table = ContingencyTable::build(pairs.predicted, pairs.truth);
  std::int64_t agreed = 0;
  for (const auto& row : table.counts) {
    agreed += *std::max_element(row.begin(), row.end());
  }
  return static_cast<double>(agreed) / static_cast<double>(table.total);
}

namespace {

std::vector<double> best_iou_rows(const ContingencyTable& table) {
  // IoU between truth class j and predicted cluster i from the contingency
  // counts: |i ∩ j| / (|i| + |j| - |i ∩ j|).
  std::vector<double> best(table.col_totals.size(), 0.0);
  for (std::size_t j = 0; j < table.col_totals.size(); ++j) {
    for (std::size_t i = 0; i < table.counts.size(); ++i) {
      const auto inter = table.counts[i][j];
      const auto uni = table.row_totals[i] + table.col_totals[j] - inter;
      if (uni > 0) {
        best[j] = std::max(best[j], static_cast<double>(inter) / static_cast<double>(uni));
      }
    }
  }
  return best;
}

}  // namespace

double mmiou(const AlignedLabels& pairs) {
  const auto table = ContingencyTable::build(pairs.predicted, pairs.truth);
  const auto best = best_iou_rows(table);
  double sum = 0.0;
  for (double b : best) sum += b;
  return sum / static_cast<double>(best.size());
}

std::vector<double> mmiou_per_class(const AlignedLabels& pairs) {
  if (pairs.truth.empty()) throw UsageError("mmiou_per_class: empty pairs");
  int max_label = 0;
  for (int t : pairs.truth) max_label = std::max(max_label, t);

  // Dense over ground-truth ids so callers can line results up with the
  // benchmark's label-name table.
  std::vector<double> out(static_cast<std::size_t>(max_label) + 1, 0.0);
  const auto table = ContingencyTable::build(pairs.predicted, pairs.truth);

  // Rebuild the truth-id order used by the compaction above.
  std::vector<int> order;
  {
    std::map<int, int> seen;
    for (int t : pairs.truth) {
      if (seen.emplace(t, 0).second) order.push_back(t);
    }
  }
  const auto best = best_iou_rows(table);
  for (std::size_t j = 0; j < order.size(); ++j) {
    out[static_cast<std::size_t>(order[j])] = best[j];
  }
  return out;
}

NeighborhoodMap baseline_random(const FeatureGrid& features, int n_clusters,
                                std::uint64_t seed) {
  if (n_clusters < 1) throw UsageError("baseline_random: need at least one cluster");
  const auto assigned = features.assigned_indices();
  Rng rng(seed);
  std::vector<int> labels(assigned.size());
  for (auto& label : labels) {
    label = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n_clusters)));
  }
  return map_from_labels(features, assigned, labels, 0.0);
}

std::vector<std::vector<double>> baseline_features(const FeatureGrid& features,
                                                   bool with_density) {
  const auto assigned = features.assigned_indices();
  const std::size_t dims = with_density ? 3 : 2;
  std::vector<std::vector<double>> rows(assigned.size(), std::vector<double>(dims, 0.0));
  for (std::size_t i = 0; i < assigned.size(); ++i) {
    const auto& feature = *features.cells[static_cast<std::size_t>(assigned[i])];
    rows[i][0] = feature.effective_location.lon;
    rows[i][1] = feature.effective_location.lat;
    if (with_density) rows[i][2] = std::log1p(static_cast<double>(feature.support));
  }

  // Per-column z-scores (population variance); constant columns become zero.
  for (std::size_t k = 0; k < dims; ++k) {
    double mean = 0.0;
    for (const auto& row : rows) mean += row[k];
    mean /= static_cast<double>(rows.size());
    double var = 0.0;
    for (const auto& row : rows) var += (row[k] - mean) * (row[k] - mean);
    var /= static_cast<double>(rows.size());
    const double sd = std::sqrt(var);
    for (auto& row : rows) {
      row[k] = sd > 0.0 ? (row[k] - mean) / sd : 0.0;
    }
  }
  return rows;
}

NeighborhoodMap baseline_proximity(const FeatureGrid& features, int n_clusters,
                                   std::uint64_t seed, const KMeansOptions& options) {
  return geometric_baseline(features, n_clusters, seed, options, /*with_density=*/false);
}

NeighborhoodMap baseline_pid(const FeatureGrid& features, int n_clusters, std::uint64_t seed,
                             const KMeansOptions& options) {
  return geometric_baseline(features, n_clusters, seed, options, /*with_density=*/true);
}

}  // namespace undermap
