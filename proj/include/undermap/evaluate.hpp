#pragma once

#include <cstdint>
#include <vector>

#include "undermap/cluster.hpp"
#include "undermap/featurize.hpp"
#include "undermap/types.hpp"

namespace undermap {

// Paired (predicted, ground-truth) labels over the cells present in both
// the map and the benchmark, plus counts of what fell through.
struct AlignedLabels {
  std::vector<int> predicted;
  std::vector<int> truth;
  std::int64_t dropped_benchmark = 0;  // benchmark cells without a prediction
  std::int64_t dropped_map = 0;        // assigned map cells no benchmark cell hit
};

// Pairs each benchmark cell whose center lands in an assigned map cell.
// Requires the two granularities to be an integer multiple of one another.
AlignedLabels align_to_benchmark(const NeighborhoodMap& map, const LabelGrid& benchmark);

// Co-occurrence counts between predicted labels (rows) and ground-truth
// labels (columns); label ids are compacted to dense indices.
struct ContingencyTable {
  std::vector<std::vector<std::int64_t>> counts;
  std::vector<std::int64_t> row_totals;
  std::vector<std::int64_t> col_totals;
  std::int64_t total = 0;

  static ContingencyTable build(const std::vector<int>& predicted,
                                const std::vector<int>& truth);
};

// I(P;G) / sqrt(H(P) H(G)); 1 for identical partitions, 0 when one side is
// constant and the partitions differ.
double nmi(const AlignedLabels& pairs);

// Fraction of cells covered by each predicted cluster's majority class.
double purity(const AlignedLabels& pairs);

// Mean over ground-truth classes of the best IoU against any predicted
// cluster.
double mmiou(const AlignedLabels& pairs);

// Best IoU per ground-truth label id (dense over ids 0..max present).
std::vector<double> mmiou_per_class(const AlignedLabels& pairs);

// Seeded uniform labels over the assigned cells.
NeighborhoodMap baseline_random(const FeatureGrid& features, int n_clusters,
                                std::uint64_t seed);

// Euclidean K-means on the assigned cells' standardized locations.
NeighborhoodMap baseline_proximity(const FeatureGrid& features, int n_clusters,
                                   std::uint64_t seed, const KMeansOptions& options = {});

// Euclidean K-means on standardized (lon, lat, log1p(support)).
NeighborhoodMap baseline_pid(const FeatureGrid& features, int n_clusters, std::uint64_t seed,
                             const KMeansOptions& options = {});

// Feature rows used by the geometric baselines: effective record-centroid
// locations, optionally with the density column, each column standardized
// to zero mean and unit variance (constant columns become zero).
std::vector<std::vector<double>> baseline_features(const FeatureGrid& features,
                                                   bool with_density);

}  // namespace undermap
