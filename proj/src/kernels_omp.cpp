#include <cassert>
#include <cstdint>
#include <vector>

#include "spalign/kernels.hpp"

namespace spalign::kernels::parallel {

namespace {
using index_t = std::int64_t;

bool large(std::size_t n) { return n >= kParallelThreshold; }
}  // namespace

void combine(double wa, std::span<const double> a, double wb, std::span<const double> b,
             std::span<double> out) {
  assert(a.size() == b.size() && out.size() == a.size());
  const index_t n = static_cast<index_t>(out.size());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
#pragma omp parallel for schedule(static) if (large(out.size()))
  for (index_t i = 0; i < n; ++i) po[i] = wa * pa[i] + wb * pb[i];
}

void unmix(std::span<const double> x, double c, std::span<const double> e, double d,
           std::span<double> out) {
  assert(x.size() == e.size() && out.size() == x.size());
  const index_t n = static_cast<index_t>(out.size());
  const double* px = x.data();
  const double* pe = e.data();
  double* po = out.data();
#pragma omp parallel for schedule(static) if (large(out.size()))
  for (index_t i = 0; i < n; ++i) po[i] = (px[i] - c * pe[i]) / d;
}

void masked_blend(std::span<const double> a, std::span<const double> b,
                  std::span<const double> mask, std::span<double> out) {
  assert(a.size() == b.size() && out.size() == a.size() && a.size() % mask.size() == 0);
  const index_t n = static_cast<index_t>(out.size());
  const index_t m = static_cast<index_t>(mask.size());
  const double* pa = a.data();
  const double* pb = b.data();
  const double* pm = mask.data();
  double* po = out.data();
#pragma omp parallel for schedule(static) if (large(out.size()))
  for (index_t i = 0; i < n; ++i) {
    const double w = pm[i % m];
    po[i] = w * pa[i] + (1.0 - w) * pb[i];
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  const std::size_t n = a.size();
  const index_t chunks = static_cast<index_t>((n + kReductionChunk - 1) / kReductionChunk);
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
#pragma omp parallel for schedule(static) if (large(n))
  for (index_t c = 0; c < chunks; ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kReductionChunk;
    const std::size_t hi = std::min(n, lo + kReductionChunk);
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double d = a[i] - b[i];
      acc += d * d;
    }
    partial[static_cast<std::size_t>(c)] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

void component_distances(std::span<const double> x, std::span<const double> means, double s,
                         std::span<double> dist) {
  const std::size_t dim = x.size();
  assert(means.size() == dim * dist.size());
  const index_t k = static_cast<index_t>(dist.size());
  // One component per iteration; the inner sum stays sequential, so each
  // distance matches the serial kernel bitwise.
#pragma omp parallel for schedule(static) if (large(means.size()) && k > 1)
  for (index_t c = 0; c < k; ++c) {
    const double* mu = means.data() + static_cast<std::size_t>(c) * dim;
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = x[j] - s * mu[j];
      acc += d * d;
    }
    dist[static_cast<std::size_t>(c)] = acc;
  }
}

void weighted_residual_sum(std::span<const double> x, std::span<const double> means, double s,
                           std::span<const double> coef, std::span<double> out) {
  const std::size_t dim = x.size();
  assert(means.size() == dim * coef.size() && out.size() == dim);
  const index_t n = static_cast<index_t>(dim);
  const std::size_t k = coef.size();
#pragma omp parallel for schedule(static) if (large(means.size()))
  for (index_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t c = 0; c < k; ++c)
      acc += coef[c] * (x[static_cast<std::size_t>(j)] - s * means[c * dim + static_cast<std::size_t>(j)]);
    out[static_cast<std::size_t>(j)] = acc;
  }
}

}  // namespace spalign::kernels::parallel
