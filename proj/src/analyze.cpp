#include "undermap/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace undermap {

namespace {

StyleHistogram histogram_from_counts(const std::vector<std::int64_t>& counts) {
  StyleHistogram h;
  h.values.resize(counts.size());
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  h.support = total;
  if (total > 0) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
      h.values[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    }
  }
  return h;
}

std::vector<ScoredPair> sorted_cross_pairs(std::vector<ScoredPair> pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const ScoredPair& x, const ScoredPair& y) {
    if (x.value != y.value) return x.value < y.value;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  return pairs;
}

}  // namespace

CityProfile build_profile(const CityDataset& dataset, const NeighborhoodMap& map,
                          const std::string& city_name) {
  const int n_labels = map.cluster_count();
  const auto k = static_cast<std::size_t>(dataset.style_count);

  std::vector<std::int64_t> city_counts(k, 0);
  std::vector<std::vector<std::int64_t>> label_counts(
      static_cast<std::size_t>(std::max(n_labels, 0)), std::vector<std::int64_t>(k, 0));

  for (const auto& record : dataset.records) {
    city_counts[static_cast<std::size_t>(record.style_id)] += 1;
    const auto cell = map.grid.cell_containing({record.lon, record.lat});
    if (!cell) continue;
    const int label = map.labels[static_cast<std::size_t>(map.grid.flat_index(*cell))];
    if (label == kUnassignedCell) continue;
    label_counts[static_cast<std::size_t>(label)][static_cast<std::size_t>(record.style_id)] += 1;
  }

  CityProfile profile;
  profile.city = city_name.empty() ? dataset.city_name : city_name;
  profile.descriptor = histogram_from_counts(city_counts);

  std::vector<std::vector<CellIndex>> label_cells(static_cast<std::size_t>(std::max(n_labels, 0)));
  for (int i = 0; i < map.grid.cell_count(); ++i) {
    const int label = map.labels[static_cast<std::size_t>(i)];
    if (label != kUnassignedCell) {
      label_cells[static_cast<std::size_t>(label)].push_back(map.grid.cell_at(i));
    }
  }

  for (int label = 0; label < n_labels; ++label) {
    auto descriptor = histogram_from_counts(label_counts[static_cast<std::size_t>(label)]);
    if (descriptor.support == 0) {
      ++profile.dropped_labels;
      continue;
    }
    profile.neighborhoods.push_back(Neighborhood{
        label, std::move(descriptor), std::move(label_cells[static_cast<std::size_t>(label)])});
  }
  return profile;
}

std::pair<int, double> unique_neighborhood(const CityProfile& profile) {
  const auto n = profile.neighborhoods.size();
  if (n < 2) throw UsageError("unique_neighborhood: need at least two neighborhoods");

  int best = 0;
  double best_score = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      nearest = std::min(nearest, l1_distance(profile.neighborhoods[i].descriptor.values,
                                              profile.neighborhoods[j].descriptor.values));
    }
    if (nearest > best_score) {
      best_score = nearest;
      best = static_cast<int>(i);
    }
  }
  return {best, best_score};
}

std::vector<UniqueEntry> rank_unique_across_cities(const std::vector<CityProfile>& profiles) {
  std::vector<UniqueEntry> entries;
  for (const auto& profile : profiles) {
    const auto n = profile.neighborhoods.size();
    if (n < 2) throw UsageError("rank_unique: every city needs at least two neighborhoods");
    for (std::size_t i = 0; i < n; ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        nearest = std::min(nearest, l1_distance(profile.neighborhoods[i].descriptor.values,
                                                profile.neighborhoods[j].descriptor.values));
      }
      entries.push_back(UniqueEntry{profile.city, profile.neighborhoods[i].label, nearest});
    }
  }
  std::stable_sort(entries.begin(), entries.end(), [](const UniqueEntry& x, const UniqueEntry& y) {
    if (x.score != y.score) return x.score > y.score;
    if (x.city != y.city) return x.city < y.city;
    return x.label < y.label;
  });
  return entries;
}

std::vector<ScoredPair> similar_pairs(const CityProfile& a, const CityProfile& b) {
  if (a.neighborhoods.empty() || b.neighborhoods.empty()) {
    throw UsageError("similar_pairs: both profiles must be non-empty");
  }
  std::vector<ScoredPair> pairs;
  pairs.reserve(a.neighborhoods.size() * b.neighborhoods.size());
  for (std::size_t i = 0; i < a.neighborhoods.size(); ++i) {
    for (std::size_t j = 0; j < b.neighborhoods.size(); ++j) {
      pairs.push_back(ScoredPair{static_cast<int>(i), static_cast<int>(j),
                                 l1_distance(a.neighborhoods[i].descriptor.values,
                                             b.neighborhoods[j].descriptor.values)});
    }
  }
  return sorted_cross_pairs(std::move(pairs));
}

std::vector<std::int8_t> contextual_encoding(const StyleHistogram& neighborhood,
                                             const StyleHistogram& city, double tolerance) {
  if (neighborhood.size() != city.size()) {
    throw UsageError("contextual_encoding: dimension mismatch");
  }
  std::vector<std::int8_t> encoding(neighborhood.size(), 0);
  for (std::size_t k = 0; k < encoding.size(); ++k) {
    const double diff = neighborhood.values[k] - city.values[k];
    if (diff > tolerance) encoding[k] = 1;
    else if (diff < -tolerance) encoding[k] = -1;
  }
  return encoding;
}

double sign_cosine_distance(const std::vector<std::int8_t>& u, const std::vector<std::int8_t>& v) {
  if (u.size() != v.size()) throw UsageError("sign_cosine_distance: dimension mismatch");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    dot += static_cast<double>(u[k]) * static_cast<double>(v[k]);
    nu += static_cast<double>(u[k]) * static_cast<double>(u[k]);
    nv += static_cast<double>(v[k]) * static_cast<double>(v[k]);
  }
  if (nu == 0.0 || nv == 0.0) return 1.0;
  return std::clamp(1.0 - dot / (std::sqrt(nu) * std::sqrt(nv)), 0.0, 2.0);
}

std::vector<ScoredPair> analogy_pairs(const CityProfile& a, const CityProfile& b,
                                      double tolerance) {
  if (a.neighborhoods.empty() || b.neighborhoods.empty()) {
    throw UsageError("analogy_pairs: both profiles must be non-empty");
  }
  std::vector<std::vector<std::int8_t>> enc_a, enc_b;
  enc_a.reserve(a.neighborhoods.size());
  enc_b.reserve(b.neighborhoods.size());
  for (const auto& n : a.neighborhoods) {
    enc_a.push_back(contextual_encoding(n.descriptor, a.descriptor, tolerance));
  }
  for (const auto& n : b.neighborhoods) {
    enc_b.push_back(contextual_encoding(n.descriptor, b.descriptor, tolerance));
  }

  std::vector<ScoredPair> pairs;
  pairs.reserve(enc_a.size() * enc_b.size());
  for (std::size_t i = 0; i < enc_a.size(); ++i) {
    for (std::size_t j = 0; j < enc_b.size(); ++j) {
      pairs.push_back(ScoredPair{static_cast<int>(i), static_cast<int>(j),
                                 sign_cosine_distance(enc_a[i], enc_b[j])});
    }
  }
  return sorted_cross_pairs(std::move(pairs));
}

}  // namespace undermap
