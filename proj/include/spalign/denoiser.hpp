#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spalign/grid.hpp"
#include "spalign/mixing.hpp"
#include "spalign/mixture.hpp"

namespace spalign {

/// Stand-in for the edit prompt: unconditional, or a class label.
class Condition {
 public:
  static Condition unconditional() { return Condition(-1); }
  static Condition of_class(int k);

  bool is_unconditional() const noexcept { return label_ < 0; }
  /// Class label; only meaningful when conditional.
  int label() const noexcept { return label_; }

  std::string to_string() const;  // "uncond" or the class number
  static Condition parse(const std::string& text);

  friend bool operator==(Condition, Condition) = default;

 private:
  explicit Condition(int label) : label_(label) {}
  int label_;
};

struct NoiseLevel {
  int t = 0;
  double alpha_bar = 1.0;
};

/// Noise predictor eps(x_t, t, condition). Implementations are immutable
/// after construction and safe to call concurrently.
class EpsilonModel {
 public:
  virtual ~EpsilonModel() = default;

  virtual const Shape& shape() const = 0;
  virtual LatentGrid predict(const LatentGrid& x_t, NoiseLevel level, Condition cond) const = 0;
  /// Editing mask suggested for a condition, if the model can provide one.
  virtual std::optional<MixMask> mask_hint(Condition) const { return std::nullopt; }
};

struct GuidanceConfig {
  double scale = 10.0;
};

/// eps_uncond + s * (eps_cond - eps_uncond), evaluated as
/// (1 - s) * eps_uncond + s * eps_cond so that s = 0 and s = 1 reproduce the
/// inputs exactly.
LatentGrid cfg_combine(const LatentGrid& eps_uncond, const LatentGrid& eps_cond, GuidanceConfig g);

/// Bayes-optimal noise prediction for data drawn from `spec`:
///   eps = sqrt(1-ab) * sum_i r_i (x - sqrt(ab) mu_i) / (ab s_i^2 + 1 - ab)
/// with r_i the responsibilities under the diffused marginals
/// N(sqrt(ab) mu_i, (ab s_i^2 + 1 - ab) I), restricted to the condition's
/// class (all components when unconditional).
LatentGrid gm_epsilon(const LatentGrid& x_t, double alpha_bar, Condition cond, const MixtureSpec& spec);

/// Responsibilities r_i used by gm_epsilon, indexed like spec.components();
/// components outside the condition get 0.
std::vector<double> gm_responsibilities(const LatentGrid& x_t, double alpha_bar, Condition cond,
                                        const MixtureSpec& spec);

/// P(class = k | x) under the clean mixture. Zero-variance components count
/// as point masses. If no component has positive density at x the class
/// priors are returned.
double gm_class_posterior(const LatentGrid& x, int k, const MixtureSpec& spec);
std::map<int, double> gm_class_posteriors(const LatentGrid& x, const MixtureSpec& spec);

/// Analytic epsilon model backed by a mixture spec.
class GaussianMixtureDenoiser final : public EpsilonModel {
 public:
  explicit GaussianMixtureDenoiser(MixtureSpec spec) : spec_(std::move(spec)) {}

  const Shape& shape() const override { return spec_.shape(); }
  LatentGrid predict(const LatentGrid& x_t, NoiseLevel level, Condition cond) const override {
    return gm_epsilon(x_t, level.alpha_bar, cond, spec_);
  }
  const MixtureSpec& spec() const noexcept { return spec_; }

 private:
  MixtureSpec spec_;
};

}  // namespace spalign
