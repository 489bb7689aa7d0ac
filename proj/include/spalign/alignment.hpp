#pragma once

#include <map>
#include <string>

#include "spalign/grid.hpp"

namespace spalign {

/// Which quantity of the reverse step is pulled toward the reference.
enum class AlignmentMode {
  None,
  Input,          // x_t, toward the stochastic inverse of the reference
  Epsilon,        // predicted noise, toward x_t - reference
  EpsilonScaled,  // predicted noise, toward (x_t - sqrt(ab) ref) / sqrt(1 - ab)
  PredX0,         // x0 estimate, toward the reference
};

std::string to_string(AlignmentMode mode);
AlignmentMode parse_alignment_mode(const std::string& text);

/// Strength schedule: a constant c, or b_max * t / T.
struct BetaLaw {
  enum class Kind { Constant, Linear };
  Kind kind = Kind::Constant;
  double value = 0.3;

  static BetaLaw constant(double c) { return {Kind::Constant, c}; }
  static BetaLaw linear(double b_max) { return {Kind::Linear, b_max}; }
};

struct AlignmentConfig {
  AlignmentMode mode = AlignmentMode::PredX0;
  /// Alignment is active for timesteps t > K.
  int K = 200;
  BetaLaw beta;
  /// Feed the unaligned noise prediction to the DDIM direction term.
  bool symmetry_breaking = false;

  /// pred-x0, K = T/5, constant 0.3.
  static AlignmentConfig defaults(int T);
  /// Full-strength alignment over every step (K = 0, beta = 1).
  static AlignmentConfig reconstruction(AlignmentMode mode);

  /// Throws std::invalid_argument unless K in [0, T] and the law's value is in [0, 1].
  void validate(int T) const;

  bool active_at(int t) const noexcept { return mode != AlignmentMode::None && t > K; }

  // Keys: mode, K, beta.law (constant|linear), beta.value, symmetry_breaking.
  std::map<std::string, std::string> to_kv() const;
  static AlignmentConfig from_kv(const std::map<std::string, std::string>& kv);
};

/// Alignment strength at timestep t, always in [0, 1].
double beta_at(int t, int T, const AlignmentConfig& cfg);

/// t > K: beta * stoch_inv + (1 - beta) * x_t; otherwise x_t.
LatentGrid align_input(const LatentGrid& x_t, const LatentGrid& stoch_inv, int t, int K, double beta);

/// t > K: beta * (x_t - reference) + (1 - beta) * eps; otherwise eps.
LatentGrid align_epsilon(const LatentGrid& eps, const LatentGrid& x_t, const LatentGrid& reference, int t, int K,
                         double beta);

/// t > K: beta * eps_star + (1 - beta) * eps with the exact noise of x_t
/// relative to the reference, eps_star = (x_t - sqrt(ab) ref) / sqrt(1 - ab).
/// Requires ab in (0, 1).
LatentGrid align_epsilon_scaled(const LatentGrid& eps, const LatentGrid& x_t, const LatentGrid& reference,
                                double alpha_bar, int t, int K, double beta);

/// t > K: beta * reference + (1 - beta) * pred; otherwise pred.
LatentGrid align_pred_x0(const LatentGrid& pred, const LatentGrid& reference, int t, int K, double beta);

}  // namespace spalign
