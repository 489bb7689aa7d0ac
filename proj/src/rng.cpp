#include "spalign/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace spalign {

namespace {
constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;
}

RngStream::RngStream(std::uint64_t seed, std::uint32_t stream) : seed_(seed), stream_(stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), stream};
  engine_.seed(seq);
}

double RngStream::uniform() { return static_cast<double>(engine_() >> 11) * kTwoPow53Inv; }

double RngStream::normal() {
  ++position_;
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(angle);
  has_cached_ = true;
  return r * std::cos(angle);
}

LatentGrid gaussian_grid(RngStream& rng, const Shape& shape) {
  if (shape.empty()) throw std::invalid_argument("gaussian_grid: empty shape");
  std::vector<double> v(shape.element_count());
  for (auto& x : v) x = rng.normal();
  return LatentGrid(shape, std::move(v));
}

}  // namespace spalign
