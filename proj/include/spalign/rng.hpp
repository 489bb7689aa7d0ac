#pragma once

#include <cstdint>
#include <random>

#include "spalign/grid.hpp"

namespace spalign {

/// Deterministic Gaussian source, generator "mt19937_64/box-muller v1".
///
/// The engine is std::mt19937_64 seeded through std::seed_seq with the words
/// {seed & 0xffffffff, seed >> 32, stream}; both algorithms are fixed by the
/// C++ standard, so the raw 64-bit sequence is portable. Each normal pair is
/// produced from two draws a, b:
///
///   u1 = 1 - (a >> 11) * 2^-53        in (0, 1]
///   u2 =     (b >> 11) * 2^-53        in [0, 1)
///   r  = sqrt(-2 ln u1)
///   z0 = r cos(2 pi u2), z1 = r sin(2 pi u2)
///
/// z0 is returned first and z1 is cached for the next call.
class RngStream {
 public:
  static constexpr const char* kGeneratorName = "mt19937_64/box-muller v1";

  explicit RngStream(std::uint64_t seed, std::uint32_t stream = 0);

  double normal();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint32_t stream() const noexcept { return stream_; }
  /// Number of standard normals handed out so far.
  std::uint64_t position() const noexcept { return position_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::uint32_t stream_;
  std::uint64_t position_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Sub-stream ids used by the editor so that optional draws in one role never
/// shift the sequence seen by another.
namespace streams {
inline constexpr std::uint32_t kTrajectory = 0;  // x_T, SDEdit injection noise, DDPM noise
inline constexpr std::uint32_t kAlignment = 1;   // stochastic-inverse noise for input alignment
inline constexpr std::uint32_t kReference = 2;   // sampled reference latents
}  // namespace streams

/// i.i.d. standard normal grid; advances `rng` by shape.element_count() draws.
LatentGrid gaussian_grid(RngStream& rng, const Shape& shape);

}  // namespace spalign
