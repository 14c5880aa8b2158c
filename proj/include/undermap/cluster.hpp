#pragma once

#include <cstdint>
#include <vector>

#include "undermap/featurize.hpp"
#include "undermap/types.hpp"

namespace undermap {

enum class UpdateRule { kMedian, kMean };

struct KMeansOptions {
  int max_iter = 100;
  UpdateRule update_rule = UpdateRule::kMedian;
  int restarts = 10;
  int workers = 1;

  friend bool operator==(const KMeansOptions&, const KMeansOptions&) = default;
};

// Per-iteration objective values: after the assignment step and after the
// raw centroid update. With the matching rule (median under L1, mean under
// squared L2) the update step never exceeds the assignment step's value;
// the final simplex renormalization is outside the loop and may lift the
// reported inertia above the last raw objective.
struct IterationStats {
  double assign_objective = 0.0;
  double update_objective = 0.0;
};

struct KMeansResult {
  std::vector<int> labels;
  std::vector<std::vector<double>> centroids;
  double inertia = 0.0;
  int iterations = 0;
  int best_restart = 0;
};

enum class Metric { kL1, kL2Squared };

// Lloyd iterations with seeded k-means++ initialization (probabilities
// proportional to the distance to the nearest chosen center), `restarts`
// independent runs with seeds seed+0..restarts-1, lowest final objective
// wins, ties to the earliest restart. When `renormalize_centroids` is set
// the converged centroids are scaled back onto the simplex before the
// final inertia is taken. Deterministic for a fixed seed and any worker
// count.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, int n_clusters,
                    std::uint64_t seed, Metric metric, const KMeansOptions& options,
                    bool renormalize_centroids, std::vector<IterationStats>* trace = nullptr);

// L1-nearest centroid per point; ties go to the lowest centroid index.
std::vector<int> assign_l1(const std::vector<std::vector<double>>& points,
                           const std::vector<std::vector<double>>& centroids,
                           int workers = 1);

// Median rule: component-wise median per cluster, renormalized to sum 1.
// Mean rule: arithmetic mean. Empty clusters are reseeded to the point
// farthest from their previous centroid.
std::vector<std::vector<double>> update_centroids(
    const std::vector<std::vector<double>>& points, const std::vector<int>& labels,
    int n_clusters, UpdateRule rule, const std::vector<std::vector<double>>& previous,
    bool renormalize);

double inertia_l1(const std::vector<std::vector<double>>& points,
                  const std::vector<int>& labels,
                  const std::vector<std::vector<double>>& centroids);

// Discovered map: one label per grid cell (kUnassignedCell where no feature
// was available), plus the centroids that produced it.
inline constexpr int kUnassignedCell = -1;

struct NeighborhoodMap {
  GridSpec grid;
  int style_count = 0;
  std::vector<int> labels;  // row-major, size grid.cell_count()
  std::vector<std::vector<double>> centroids;  // may be empty for baselines
  double inertia = 0.0;

  int cluster_count() const;
  std::int64_t assigned_count() const;

  friend bool operator==(const NeighborhoodMap&, const NeighborhoodMap&) = default;
};

// Clusters the assigned cells' histograms under the L1 metric.
NeighborhoodMap kmeans_l1(const FeatureGrid& features, int n_clusters, std::uint64_t seed,
                          const KMeansOptions& options = {});

// Highest-mass style indices per centroid (ties to the lower style id).
std::vector<std::vector<int>> top_styles(const NeighborhoodMap& map, int count);

}  // namespace undermap
