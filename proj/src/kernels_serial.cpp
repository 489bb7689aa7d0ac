#include <cassert>

#include "spalign/kernels.hpp"

namespace spalign::kernels::serial {

void combine(double wa, std::span<const double> a, double wb, std::span<const double> b,
             std::span<double> out) {
  assert(a.size() == b.size() && out.size() == a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = wa * a[i] + wb * b[i];
}

void unmix(std::span<const double> x, double c, std::span<const double> e, double d,
           std::span<double> out) {
  assert(x.size() == e.size() && out.size() == x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (x[i] - c * e[i]) / d;
}

void masked_blend(std::span<const double> a, std::span<const double> b,
                  std::span<const double> mask, std::span<double> out) {
  assert(a.size() == b.size() && out.size() == a.size() && a.size() % mask.size() == 0);
  const std::size_t m = mask.size();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double w = mask[i % m];
    out[i] = w * a[i] + (1.0 - w) * b[i];
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void component_distances(std::span<const double> x, std::span<const double> means, double s,
                         std::span<double> dist) {
  const std::size_t dim = x.size();
  assert(means.size() == dim * dist.size());
  for (std::size_t c = 0; c < dist.size(); ++c) {
    const double* mu = means.data() + c * dim;
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = x[j] - s * mu[j];
      acc += d * d;
    }
    dist[c] = acc;
  }
}

void weighted_residual_sum(std::span<const double> x, std::span<const double> means, double s,
                           std::span<const double> coef, std::span<double> out) {
  const std::size_t dim = x.size();
  assert(means.size() == dim * coef.size() && out.size() == dim);
  for (std::size_t j = 0; j < dim; ++j) {
    double acc = 0.0;
    for (std::size_t c = 0; c < coef.size(); ++c) acc += coef[c] * (x[j] - s * means[c * dim + j]);
    out[j] = acc;
  }
}

}  // namespace spalign::kernels::serial
