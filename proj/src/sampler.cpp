#include "spalign/sampler.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "spalign/latent_ops.hpp"

namespace spalign {

namespace {

void require_alpha(double ab, const char* op) {
  if (!(ab > 0.0 && ab <= 1.0)) {
    throw std::invalid_argument(std::string(op) + ": alpha_bar must be in (0,1]");
  }
}

void require_ordered(double ab, double ab_prev, const char* op) {
  require_alpha(ab, op);
  require_alpha(ab_prev, op);
  if (ab_prev < ab) throw std::invalid_argument(std::string(op) + ": alpha_bar_prev < alpha_bar");
}

}  // namespace

LatentGrid forward_diffuse(const LatentGrid& x0, const LatentGrid& eps, double alpha_bar) {
  require_alpha(alpha_bar, "forward_diffuse");
  require_same_shape(x0, eps, "forward_diffuse");
  return affine(std::sqrt(alpha_bar), x0, std::sqrt(1.0 - alpha_bar), eps);
}

LatentGrid stochastic_inverse(const LatentGrid& reference, const LatentGrid& z, double alpha_bar) {
  require_alpha(alpha_bar, "stochastic_inverse");
  require_same_shape(reference, z, "stochastic_inverse");
  return affine(std::sqrt(alpha_bar), reference, std::sqrt(1.0 - alpha_bar), z);
}

LatentGrid pred_x0(const LatentGrid& x_t, const LatentGrid& eps, double alpha_bar) {
  require_alpha(alpha_bar, "pred_x0");
  require_same_shape(x_t, eps, "pred_x0");
  return unmix(x_t, std::sqrt(1.0 - alpha_bar), eps, std::sqrt(alpha_bar));
}

LatentGrid ddim_update(const LatentGrid& pred, const LatentGrid& eps_direction, double alpha_bar_prev) {
  require_alpha(alpha_bar_prev, "ddim_update");
  require_same_shape(pred, eps_direction, "ddim_update");
  return affine(std::sqrt(alpha_bar_prev), pred, std::sqrt(1.0 - alpha_bar_prev), eps_direction);
}

LatentGrid ddim_step(const LatentGrid& x_t, const LatentGrid& eps, double alpha_bar, double alpha_bar_prev) {
  return ddim_step_split(x_t, eps, eps, alpha_bar, alpha_bar_prev);
}

LatentGrid ddim_step_split(const LatentGrid& x_t, const LatentGrid& eps_for_pred,
                           const LatentGrid& eps_for_direction, double alpha_bar, double alpha_bar_prev) {
  require_ordered(alpha_bar, alpha_bar_prev, "ddim_step");
  require_same_shape(x_t, eps_for_direction, "ddim_step");
  return ddim_update(pred_x0(x_t, eps_for_pred, alpha_bar), eps_for_direction, alpha_bar_prev);
}

LatentGrid ddpm_transition(const LatentGrid& x_t, const LatentGrid& eps, double alpha_bar,
                           double alpha_bar_prev, RngStream& rng) {
  require_ordered(alpha_bar, alpha_bar_prev, "ddpm_step");
  if (alpha_bar == 1.0) throw std::invalid_argument("ddpm_step: alpha_bar must be < 1");
  require_same_shape(x_t, eps, "ddpm_step");
  const double a = alpha_bar / alpha_bar_prev;
  const double b = 1.0 - a;
  LatentGrid mean = unmix(x_t, b / std::sqrt(1.0 - alpha_bar), eps, std::sqrt(a));
  const double variance = (1.0 - alpha_bar_prev) / (1.0 - alpha_bar) * b;
  if (!(variance > 0.0)) return mean;
  return affine(1.0, mean, std::sqrt(variance), gaussian_grid(rng, x_t.shape()));
}

LatentGrid ddpm_step(const LatentGrid& x_t, const LatentGrid& eps, int t, const NoiseSchedule& schedule,
                     RngStream& rng) {
  if (t < 1 || t > schedule.T()) throw std::invalid_argument("ddpm_step: t must be in [1, T]");
  return ddpm_transition(x_t, eps, schedule.alpha_bar(t), schedule.alpha_bar(t - 1), rng);
}

}  // namespace spalign
