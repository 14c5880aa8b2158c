#include "undermap/cluster.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <exception>
#include <thread>

#include "undermap/rng.hpp"

namespace undermap {

namespace {

double distance(Metric metric, const std::vector<double>& a, const std::vector<double>& b) {
  double total = 0.0;
  if (metric == Metric::kL1) {
    for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double diff = a[i] - b[i];
      total += diff * diff;
    }
  }
  return total;
}

int nearest(Metric metric, const std::vector<double>& point,
            const std::vector<std::vector<double>>& centroids) {
  int best = 0;
  double best_dist = distance(metric, point, centroids[0]);
  for (int c = 1; c < static_cast<int>(centroids.size()); ++c) {
    const double d = distance(metric, point, centroids[static_cast<std::size_t>(c)]);
    if (d < best_dist) {
      best_dist = d;
      best = c;
    }
  }
  return best;
}

std::vector<int> assign_points(Metric metric, const std::vector<std::vector<double>>& points,
                               const std::vector<std::vector<double>>& centroids, int workers) {
  std::vector<int> labels(points.size());
  const int total = static_cast<int>(points.size());
  const int n_threads = std::clamp(workers, 1, std::max(1, total));

  const auto run_range = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      labels[static_cast<std::size_t>(i)] =
          nearest(metric, points[static_cast<std::size_t>(i)], centroids);
    }
  };

  if (n_threads == 1 || total < 512) {
    run_range(0, total);
    return labels;
  }

  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_threads));
  const int chunk = (total + n_threads - 1) / n_threads;
  for (int t = 0; t < n_threads; ++t) {
    const int begin = t * chunk;
    const int end = std::min(total, begin + chunk);
    pool.emplace_back([&, t, begin, end] {
      try {
        run_range(begin, end);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return labels;
}

double objective(Metric metric, const std::vector<std::vector<double>>& points,
                 const std::vector<int>& labels,
                 const std::vector<std::vector<double>>& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    total += distance(metric, points[i], centroids[static_cast<std::size_t>(labels[i])]);
  }
  return total;
}

std::vector<std::vector<double>> seed_centroids(Metric metric,
                                                const std::vector<std::vector<double>>& points,
                                                int n_clusters, Rng& rng) {
  std::vector<std::vector<double>> centroids;
  centroids.reserve(static_cast<std::size_t>(n_clusters));
  centroids.push_back(points[rng.uniform_index(points.size())]);

  std::vector<double> nearest_dist(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    nearest_dist[i] = distance(metric, points[i], centroids[0]);
  }
  while (static_cast<int>(centroids.size()) < n_clusters) {
    const std::size_t pick = rng.weighted_index(nearest_dist);
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < points.size(); ++i) {
      nearest_dist[i] =
          std::min(nearest_dist[i], distance(metric, points[i], centroids.back()));
    }
  }
  return centroids;
}

KMeansResult run_once(const std::vector<std::vector<double>>& points, int n_clusters,
                      std::uint64_t seed, Metric metric, const KMeansOptions& options,
                      bool renormalize, std::vector<IterationStats>* trace) {
  Rng rng(seed);
  KMeansResult result;
  result.centroids = seed_centroids(metric, points, n_clusters, rng);

  // The update step is a per-cluster minimizer of the objective only when
  // the rule matches the metric (median for L1, mean for squared L2); the
  // descent assertion applies to those pairings.
  [[maybe_unused]] const bool matched_rule =
      (metric == Metric::kL1 && options.update_rule == UpdateRule::kMedian) ||
      (metric == Metric::kL2Squared && options.update_rule == UpdateRule::kMean);

  // Iterations run against the raw prototypes (component-wise medians or
  // means), keeping the E and M steps consistent so the objective descends
  // and the optimum partition is a fixpoint. Simplex renormalization is
  // applied once to the converged centroids.
  std::vector<int> labels;
  for (int iter = 0; iter < options.max_iter; ++iter) {
    auto next = assign_points(metric, points, result.centroids, options.workers);
    IterationStats stats;
    stats.assign_objective = objective(metric, points, next, result.centroids);
    if (!labels.empty() && next == labels) {
      result.iterations = iter;
      break;
    }
    labels = std::move(next);
    result.iterations = iter + 1;

    result.centroids = update_centroids(points, labels, n_clusters, options.update_rule,
                                        result.centroids, /*renormalize=*/false);
    stats.update_objective = objective(metric, points, labels, result.centroids);
    assert(!matched_rule || stats.update_objective <= stats.assign_objective + 1e-9);
    if (trace) trace->push_back(stats);
  }

  if (renormalize) {
    result.centroids = update_centroids(points, labels, n_clusters, options.update_rule,
                                        result.centroids, /*renormalize=*/true);
  }
  result.labels = std::move(labels);
  result.inertia = objective(metric, points, result.labels, result.centroids);
  return result;
}

}  // namespace

std::vector<int> assign_l1(const std::vector<std::vector<double>>& points,
                           const std::vector<std::vector<double>>& centroids, int workers) {
  if (centroids.empty()) throw UsageError("assign_l1: need at least one centroid");
  return assign_points(Metric::kL1, points, centroids, workers);
}

std::vector<std::vector<double>> update_centroids(
    const std::vector<std::vector<double>>& points, const std::vector<int>& labels,
    int n_clusters, UpdateRule rule, const std::vector<std::vector<double>>& previous,
    bool renormalize) {
  if (points.empty()) throw UsageError("update_centroids: no points");
  const std::size_t dims = points.front().size();

  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(n_clusters));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int label = labels[i];
    if (label < 0 || label >= n_clusters) throw UsageError("update_centroids: label out of range");
    members[static_cast<std::size_t>(label)].push_back(i);
  }

  std::vector<std::vector<double>> centroids(static_cast<std::size_t>(n_clusters),
                                             std::vector<double>(dims, 0.0));
  std::vector<bool> reseeded_point(points.size(), false);

  for (int c = 0; c < n_clusters; ++c) {
    auto& centroid = centroids[static_cast<std::size_t>(c)];
    const auto& cluster = members[static_cast<std::size_t>(c)];

    if (cluster.empty()) {
      // Reseed to the point farthest from this cluster's previous centroid,
      // skipping points already used to refill another empty cluster.
      const auto& anchor = previous.empty() ? points.front()
                                            : previous[static_cast<std::size_t>(c)];
      std::size_t pick = 0;
      double best = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (reseeded_point[i]) continue;
        const double d = l1_distance(points[i], anchor);
        if (d > best) {
          best = d;
          pick = i;
        }
      }
      reseeded_point[pick] = true;
      centroid = points[pick];
      continue;
    }

    if (rule == UpdateRule::kMean) {
      for (std::size_t i : cluster) {
        for (std::size_t k = 0; k < dims; ++k) centroid[k] += points[i][k];
      }
      for (auto& v : centroid) v /= static_cast<double>(cluster.size());
    } else {
      std::vector<double> column(cluster.size());
      for (std::size_t k = 0; k < dims; ++k) {
        for (std::size_t j = 0; j < cluster.size(); ++j) column[j] = points[cluster[j]][k];
        std::sort(column.begin(), column.end());
        const std::size_t mid = column.size() / 2;
        centroid[k] = (column.size() % 2 == 1)
                          ? column[mid]
                          : 0.5 * (column[mid - 1] + column[mid]);
      }
    }

    if (renormalize) {
      double sum = 0.0;
      for (double v : centroid) sum += v;
      if (sum > 1e-12) {
        for (auto& v : centroid) v /= sum;
      } else {
        // All medians zero (possible for sparse clusters); fall back to the
        // mean, which is always on the simplex.
        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i : cluster) {
          for (std::size_t k = 0; k < dims; ++k) centroid[k] += points[i][k];
        }
        for (auto& v : centroid) v /= static_cast<double>(cluster.size());
      }
    }
  }
  return centroids;
}

double inertia_l1(const std::vector<std::vector<double>>& points,
                  const std::vector<int>& labels,
                  const std::vector<std::vector<double>>& centroids) {
  return objective(Metric::kL1, points, labels, centroids);
}

KMeansResult kmeans(const std::vector<std::vector<double>>& points, int n_clusters,
                    std::uint64_t seed, Metric metric, const KMeansOptions& options,
                    bool renormalize_centroids, std::vector<IterationStats>* trace) {
  if (n_clusters < 1) throw UsageError("kmeans: need at least one cluster");
  if (static_cast<int>(points.size()) < n_clusters) {
    throw UsageError("kmeans: fewer points than clusters");
  }
  if (options.restarts < 1) throw UsageError("kmeans: restarts must be >= 1");
  if (options.max_iter < 1) throw UsageError("kmeans: max_iter must be >= 1");

  KMeansResult best;
  bool have_best = false;
  for (int restart = 0; restart < options.restarts; ++restart) {
    std::vector<IterationStats> local_trace;
    auto result = run_once(points, n_clusters, seed + static_cast<std::uint64_t>(restart),
                           metric, options, renormalize_centroids,
                           trace ? &local_trace : nullptr);
    result.best_restart = restart;
    if (!have_best || result.inertia < best.inertia) {
      best = std::move(result);
      have_best = true;
      if (trace) *trace = std::move(local_trace);
    }
  }
  return best;
}

int NeighborhoodMap::cluster_count() const {
  int highest = -1;
  for (int label : labels) highest = std::max(highest, label);
  return highest + 1;
}

std::int64_t NeighborhoodMap::assigned_count() const {
  std::int64_t n = 0;
  for (int label : labels) n += (label != kUnassignedCell) ? 1 : 0;
  return n;
}

NeighborhoodMap kmeans_l1(const FeatureGrid& features, int n_clusters, std::uint64_t seed,
                          const KMeansOptions& options) {
  const auto assigned = features.assigned_indices();
  if (n_clusters < 1) throw UsageError("kmeans_l1: need at least one cluster");
  if (static_cast<int>(assigned.size()) < n_clusters) {
    throw UsageError("kmeans_l1: fewer assigned cells than clusters");
  }

  std::vector<std::vector<double>> points;
  points.reserve(assigned.size());
  for (int idx : assigned) {
    points.push_back(features.cells[static_cast<std::size_t>(idx)]->histogram.values);
  }

  const auto result = kmeans(points, n_clusters, seed, Metric::kL1, options,
                             /*renormalize_centroids=*/true);

  NeighborhoodMap map;
  map.grid = features.grid;
  map.style_count = features.style_count;
  map.labels.assign(static_cast<std::size_t>(features.grid.cell_count()), kUnassignedCell);
  for (std::size_t i = 0; i < assigned.size(); ++i) {
    map.labels[static_cast<std::size_t>(assigned[i])] = result.labels[i];
  }
  map.centroids = result.centroids;
  map.inertia = result.inertia;
  return map;
}

std::vector<std::vector<int>> top_styles(const NeighborhoodMap& map, int count) {
  std::vector<std::vector<int>> out;
  out.reserve(map.centroids.size());
  for (const auto& centroid : map.centroids) {
    std::vector<int> order(centroid.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return centroid[static_cast<std::size_t>(a)] > centroid[static_cast<std::size_t>(b)];
    });
    order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(count)));
    out.push_back(std::move(order));
  }
  return out;
}

}  // namespace undermap
