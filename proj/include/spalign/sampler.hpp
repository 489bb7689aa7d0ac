#pragma once

#include "spalign/grid.hpp"
#include "spalign/rng.hpp"
#include "spalign/schedule.hpp"

namespace spalign {

// All alpha arguments are cumulative signal weights (alpha_bar) and must lie
// in (0, 1]. Grid arguments must share one shape.

/// sqrt(ab) * x0 + sqrt(1 - ab) * eps
LatentGrid forward_diffuse(const LatentGrid& x0, const LatentGrid& eps, double alpha_bar);

/// The reference noised to level alpha_bar with fresh noise z; same
/// combination as forward_diffuse.
LatentGrid stochastic_inverse(const LatentGrid& reference, const LatentGrid& z, double alpha_bar);

/// (x_t - sqrt(1 - ab) * eps) / sqrt(ab)
LatentGrid pred_x0(const LatentGrid& x_t, const LatentGrid& eps, double alpha_bar);

/// Deterministic DDIM update (eta = 0) built from an already formed x0
/// estimate: sqrt(ab_prev) * pred + sqrt(1 - ab_prev) * eps_direction.
LatentGrid ddim_update(const LatentGrid& pred, const LatentGrid& eps_direction, double alpha_bar_prev);

LatentGrid ddim_step(const LatentGrid& x_t, const LatentGrid& eps, double alpha_bar, double alpha_bar_prev);

/// DDIM step whose x0 estimate and direction term use different noise
/// predictions.
LatentGrid ddim_step_split(const LatentGrid& x_t, const LatentGrid& eps_for_pred,
                           const LatentGrid& eps_for_direction, double alpha_bar, double alpha_bar_prev);

/// Ancestral step between two (possibly non-adjacent) noise levels.
/// With a = ab/ab_prev and b = 1 - a:
///   mean     = (x_t - b / sqrt(1 - ab) * eps) / sqrt(a)
///   variance = (1 - ab_prev) / (1 - ab) * b
/// Noise is drawn from `rng` only when the variance is positive.
LatentGrid ddpm_transition(const LatentGrid& x_t, const LatentGrid& eps, double alpha_bar,
                           double alpha_bar_prev, RngStream& rng);

/// Ancestral step from training timestep t to t - 1 (t >= 1).
LatentGrid ddpm_step(const LatentGrid& x_t, const LatentGrid& eps, int t, const NoiseSchedule& schedule,
                     RngStream& rng);

}  // namespace spalign
