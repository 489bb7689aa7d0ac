#pragma once

// Reference computations for the tests. Nothing here calls the engine's
// density, posterior or kernel code: the mixture density is evaluated term by
// term from its definition and differentiated numerically.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "spalign/grid.hpp"

namespace oracle {

/// One isotropic component in plain numbers.
struct Component {
  double weight;  // absolute weight in the density being evaluated
  std::vector<double> mean;
  double variance;
};

/// log sum_i w_i N(x; sqrt(ab) mu_i, (ab s_i^2 + 1 - ab) I), stabilized.
inline double log_diffused_density(const std::vector<double>& x, double ab, const std::vector<Component>& comps) {
  const double d = static_cast<double>(x.size());
  std::vector<double> logs;
  for (const auto& c : comps) {
    const double var = ab * c.variance + 1.0 - ab;
    double sq = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double r = x[j] - std::sqrt(ab) * c.mean[j];
      sq += r * r;
    }
    logs.push_back(std::log(c.weight) - 0.5 * d * std::log(2.0 * std::numbers::pi * var) - 0.5 * sq / var);
  }
  const double m = *std::max_element(logs.begin(), logs.end());
  double s = 0.0;
  for (double l : logs) s += std::exp(l - m);
  return m + std::log(s);
}

/// -sqrt(1 - ab) * grad log p_t(x) by fourth-order central differences.
inline std::vector<double> fd_epsilon(const std::vector<double>& x, double ab, const std::vector<Component>& comps,
                                      double h = 1e-3) {
  std::vector<double> out(x.size());
  std::vector<double> p = x;
  for (std::size_t j = 0; j < x.size(); ++j) {
    auto at = [&](double dx) {
      p[j] = x[j] + dx;
      const double v = log_diffused_density(p, ab, comps);
      p[j] = x[j];
      return v;
    };
    const double grad = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
    out[j] = -std::sqrt(1.0 - ab) * grad;
  }
  return out;
}

/// Class posterior at t = 0 from per-class log densities (variance > 0).
inline double class_posterior(const std::vector<double>& x, const std::vector<std::vector<Component>>& classes,
                              const std::vector<double>& priors, std::size_t k) {
  std::vector<double> logs;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    logs.push_back(std::log(priors[c]) + log_diffused_density(x, 1.0, classes[c]));
  }
  const double m = *std::max_element(logs.begin(), logs.end());
  double s = 0.0;
  for (double l : logs) s += std::exp(l - m);
  return std::exp(logs[k] - m) / s;
}

/// Test-local random source, unrelated to the engine's RngStream.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }

  spalign::Shape shape(std::size_t max_rank = 3, std::size_t max_extent = 6) {
    const auto rank = static_cast<std::size_t>(integer(1, static_cast<int>(max_rank)));
    std::vector<std::size_t> e(rank);
    for (auto& v : e) v = static_cast<std::size_t>(integer(1, static_cast<int>(max_extent)));
    return spalign::Shape(e);
  }

  spalign::LatentGrid grid(const spalign::Shape& s, double scale = 3.0) {
    std::vector<double> v(s.element_count());
    for (auto& x : v) x = scale * normal();
    return spalign::LatentGrid(s, std::move(v));
  }

  /// alpha_bar in (0, 1), bounded away from the ends.
  double alpha_bar() { return uniform(1e-3, 1.0 - 1e-3); }

 private:
  std::mt19937_64 rng_;
};

}  // namespace oracle
