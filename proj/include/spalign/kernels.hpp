#pragma once

// Elementwise and reduction kernels behind the latent algebra.
//
// Two implementations with identical signatures:
//   kernels::serial    plain loops, the reference used by the tests
//   kernels::parallel  OpenMP versions used by the engine
//
// Elementwise kernels perform the same floating-point operations per element
// in both variants, so their results agree bitwise. Reductions in the
// parallel variant sum fixed-size chunks and combine the partials in chunk
// order: deterministic for any thread count, equal to the serial result up to
// rounding.

#include <cstddef>
#include <span>

namespace spalign::kernels {

/// Grids smaller than this run on the calling thread.
inline constexpr std::size_t kParallelThreshold = 1u << 14;
/// Chunk length of the parallel reductions.
inline constexpr std::size_t kReductionChunk = 4096;

#define SPALIGN_KERNEL_DECLS                                                                      \
  /* out = wa*a + wb*b */                                                                          \
  void combine(double wa, std::span<const double> a, double wb, std::span<const double> b,        \
               std::span<double> out);                                                             \
  /* out = (x - c*e) / d */                                                                        \
  void unmix(std::span<const double> x, double c, std::span<const double> e, double d,            \
             std::span<double> out);                                                               \
  /* out = m*a + (1-m)*b with m broadcast over leading axes (mask.size() divides a.size()) */     \
  void masked_blend(std::span<const double> a, std::span<const double> b,                         \
                    std::span<const double> mask, std::span<double> out);                         \
  /* sum (a-b)^2 */                                                                                \
  double squared_distance(std::span<const double> a, std::span<const double> b);                  \
  /* dist[i] = sum_j (x_j - s*means[i][j])^2 ; means is row-major [n_components x dim] */          \
  void component_distances(std::span<const double> x, std::span<const double> means, double s,    \
                           std::span<double> dist);                                                \
  /* out_j = sum_i coef[i] * (x_j - s*means[i][j]), components summed in index order */           \
  void weighted_residual_sum(std::span<const double> x, std::span<const double> means, double s,  \
                             std::span<const double> coef, std::span<double> out);

namespace serial {
SPALIGN_KERNEL_DECLS
}  // namespace serial

namespace parallel {
SPALIGN_KERNEL_DECLS
}  // namespace parallel

#undef SPALIGN_KERNEL_DECLS

}  // namespace spalign::kernels
