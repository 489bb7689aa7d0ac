// Serial reference kernels against their OpenMP counterparts, plus the
// mixture noise prediction that dominates an editing run.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "spalign/denoiser.hpp"
#include "spalign/kernels.hpp"
#include "spalign/mixture.hpp"

namespace k = spalign::kernels;

namespace {

std::vector<double> noise(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

template <bool Parallel>
void BM_combine(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = noise(n, 1), b = noise(n, 2);
  std::vector<double> out(n);
  for (auto _ : state) {
    if constexpr (Parallel) k::parallel::combine(0.3, a, 0.7, b, out);
    else k::serial::combine(0.3, a, 0.7, b, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * n * 3 * sizeof(double)));
}

template <bool Parallel>
void BM_squared_distance(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = noise(n, 1), b = noise(n, 2);
  for (auto _ : state) {
    double d = Parallel ? k::parallel::squared_distance(a, b) : k::serial::squared_distance(a, b);
    benchmark::DoNotOptimize(d);
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * n * 2 * sizeof(double)));
}

template <bool Parallel>
void BM_component_distances(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const std::size_t comps = 8;
  const auto x = noise(dim, 1), means = noise(dim * comps, 2);
  std::vector<double> dist(comps);
  for (auto _ : state) {
    if constexpr (Parallel) k::parallel::component_distances(x, means, 0.7, dist);
    else k::serial::component_distances(x, means, 0.7, dist);
    benchmark::DoNotOptimize(dist.data());
  }
}

template <bool Parallel>
void BM_weighted_residual_sum(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const std::size_t comps = 8;
  const auto x = noise(dim, 1), means = noise(dim * comps, 2), coef = noise(comps, 3);
  std::vector<double> out(dim);
  for (auto _ : state) {
    if constexpr (Parallel) k::parallel::weighted_residual_sum(x, means, 0.7, coef, out);
    else k::serial::weighted_residual_sum(x, means, 0.7, coef, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_gm_epsilon(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto spec = spalign::presets::two_class_patch(side, 4.0, 4.0);
  const spalign::LatentGrid x(spec.shape(), noise(spec.dim(), 4));
  for (auto _ : state) {
    auto eps = spalign::gm_epsilon(x, 0.5, spalign::Condition::of_class(1), spec);
    benchmark::DoNotOptimize(eps);
  }
}

}  // namespace

BENCHMARK(BM_combine<false>)->RangeMultiplier(16)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_combine<true>)->RangeMultiplier(16)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_squared_distance<false>)->RangeMultiplier(16)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_squared_distance<true>)->RangeMultiplier(16)->Range(1 << 10, 1 << 22);
BENCHMARK(BM_component_distances<false>)->RangeMultiplier(16)->Range(1 << 10, 1 << 20);
BENCHMARK(BM_component_distances<true>)->RangeMultiplier(16)->Range(1 << 10, 1 << 20);
BENCHMARK(BM_weighted_residual_sum<false>)->RangeMultiplier(16)->Range(1 << 10, 1 << 20);
BENCHMARK(BM_weighted_residual_sum<true>)->RangeMultiplier(16)->Range(1 << 10, 1 << 20);
BENCHMARK(BM_gm_epsilon)->Arg(8)->Arg(64)->Arg(512);

BENCHMARK_MAIN();
