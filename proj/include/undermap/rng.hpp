#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace undermap {

// Seeded random source with explicit samplers. The standard <random>
// distributions are implementation-defined, so every draw that must be
// reproducible across builds goes through this class instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(uniform01() * static_cast<double>(n)) % n;
  }

  // Marsaglia polar method; no state beyond the engine.
  double normal() {
    for (;;) {
      const double u = 2.0 * uniform01() - 1.0;
      const double v = 2.0 * uniform01() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) {
        return u * std::sqrt(-2.0 * std::log(s) / s);
      }
    }
  }

  // Marsaglia-Tsang for alpha >= 1, boosted for alpha < 1.
  double gamma(double alpha) {
    if (alpha < 1.0) {
      double u = uniform01();
      while (u <= 0.0) u = uniform01();
      return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Knuth product method, with additive splitting to keep exp(-lambda)
  // representable for large rates.
  std::int64_t poisson(double lambda) {
    std::int64_t total = 0;
    while (lambda > 30.0) {
      const double half = lambda * 0.5;
      total += poisson(half);
      lambda -= half;
    }
    const double limit = std::exp(-lambda);
    double prod = uniform01();
    std::int64_t count = 0;
    while (prod > limit) {
      ++count;
      prod *= uniform01();
    }
    return total + count;
  }

  // Index draw proportional to non-negative weights; uniform if all zero.
  std::size_t weighted_index(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) return uniform_index(weights.size());
    double target = uniform01() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      target -= weights[i];
      if (target < 0.0) return i;
    }
    return weights.size() - 1;
  }

  // Probability vector on the K-simplex.
  std::vector<double> dirichlet(std::size_t k, double alpha) {
    std::vector<double> out(k);
    double total = 0.0;
    for (auto& v : out) {
      v = gamma(alpha);
      total += v;
    }
    if (total <= 0.0) {
      for (auto& v : out) v = 1.0 / static_cast<double>(k);
      return out;
    }
    for (auto& v : out) v /= total;
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace undermap
