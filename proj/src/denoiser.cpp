#include "spalign/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spalign/kernels.hpp"
#include "spalign/latent_ops.hpp"

namespace spalign {

Condition Condition::of_class(int k) {
  if (k < 0) throw std::invalid_argument("class labels must be >= 0");
  return Condition(k);
}

std::string Condition::to_string() const { return is_unconditional() ? "uncond" : std::to_string(label_); }

Condition Condition::parse(const std::string& text) {
  if (text == "uncond" || text == "unconditional") return unconditional();
  std::size_t pos = 0;
  int k = -1;
  try {
    k = std::stoi(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || pos == 0 || k < 0) throw std::invalid_argument("bad condition '" + text + "'");
  return of_class(k);
}

LatentGrid cfg_combine(const LatentGrid& eps_uncond, const LatentGrid& eps_cond, GuidanceConfig g) {
  require_same_shape(eps_uncond, eps_cond, "cfg_combine");
  if (!std::isfinite(g.scale) || g.scale < 0.0) throw std::invalid_argument("guidance scale must be finite and >= 0");
  return affine(1.0 - g.scale, eps_uncond, g.scale, eps_cond);
}

namespace {

struct Posterior {
  std::vector<double> resp;      // per component, 0 outside the selection
  std::vector<double> variance;  // diffused variance per component
};

// Softmax over log w_i - D/2 log v_i - |x - sqrt(ab) mu_i|^2 / (2 v_i).
Posterior diffused_posterior(const LatentGrid& x, double alpha_bar, Condition cond, const MixtureSpec& spec) {
  if (!(alpha_bar > 0.0 && alpha_bar <= 1.0)) throw std::invalid_argument("gm_epsilon: alpha_bar must be in (0,1]");
  if (!(x.shape() == spec.shape())) throw std::invalid_argument("gm_epsilon: latent shape does not match mixture");
  if (!cond.is_unconditional() && !spec.has_class(cond.label())) {
    throw std::invalid_argument("gm_epsilon: unknown class " + cond.to_string());
  }
  const auto comps = spec.components();
  const std::size_t n = comps.size();
  const double sa = std::sqrt(alpha_bar);
  const double half_dim = 0.5 * static_cast<double>(spec.dim());

  std::vector<double> dist(n);
  kernels::parallel::component_distances(x.values(), spec.packed_means(), sa, dist);

  Posterior p{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  std::vector<double> logit(n, -std::numeric_limits<double>::infinity());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double v = alpha_bar * comps[i].variance + (1.0 - alpha_bar);
    p.variance[i] = v;
    const bool selected = cond.is_unconditional() || comps[i].class_label == cond.label();
    if (!selected) continue;
    if (!(v > 0.0)) throw std::invalid_argument("gm_epsilon: zero diffused variance (alpha_bar = 1, variance = 0)");
    const double w = cond.is_unconditional() ? spec.global_weight(i) : comps[i].weight;
    logit[i] = std::log(w) - half_dim * std::log(v) - dist[i] / (2.0 * v);
    best = std::max(best, logit[i]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (logit[i] == -std::numeric_limits<double>::infinity()) continue;
    p.resp[i] = std::exp(logit[i] - best);
    total += p.resp[i];
  }
  for (auto& r : p.resp) r /= total;
  return p;
}

}  // namespace

std::vector<double> gm_responsibilities(const LatentGrid& x_t, double alpha_bar, Condition cond,
                                        const MixtureSpec& spec) {
  return diffused_posterior(x_t, alpha_bar, cond, spec).resp;
}

LatentGrid gm_epsilon(const LatentGrid& x_t, double alpha_bar, Condition cond, const MixtureSpec& spec) {
  const Posterior p = diffused_posterior(x_t, alpha_bar, cond, spec);
  const double noise_scale = std::sqrt(1.0 - alpha_bar);
  std::vector<double> coef(p.resp.size());
  for (std::size_t i = 0; i < coef.size(); ++i) coef[i] = p.resp[i] == 0.0 ? 0.0 : noise_scale * p.resp[i] / p.variance[i];
  std::vector<double> out(x_t.size());
  kernels::parallel::weighted_residual_sum(x_t.values(), spec.packed_means(), std::sqrt(alpha_bar), coef, out);
  return LatentGrid(x_t.shape(), std::move(out));
}

std::map<int, double> gm_class_posteriors(const LatentGrid& x, const MixtureSpec& spec) {
  if (!(x.shape() == spec.shape())) throw std::invalid_argument("class posterior: latent shape does not match mixture");
  const auto comps = spec.components();
  const std::size_t n = comps.size();
  std::vector<double> dist(n);
  kernels::parallel::component_distances(x.values(), spec.packed_means(), 1.0, dist);

  std::map<int, double> post;
  for (int k : spec.classes()) post[k] = 0.0;

  // Point masses dominate any density when x sits exactly on one.
  double point_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (comps[i].variance == 0.0 && dist[i] == 0.0) {
      post[comps[i].class_label] += spec.global_weight(i);
      point_total += spec.global_weight(i);
    }
  }
  if (point_total > 0.0) {
    for (auto& [k, v] : post) v /= point_total;
    return post;
  }

  const double half_dim = 0.5 * static_cast<double>(spec.dim());
  std::vector<double> logit(n, -std::numeric_limits<double>::infinity());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double v = comps[i].variance;
    if (v == 0.0) continue;
    logit[i] = std::log(spec.global_weight(i)) - half_dim * std::log(v) - dist[i] / (2.0 * v);
    best = std::max(best, logit[i]);
  }
  if (best == -std::numeric_limits<double>::infinity()) {
    for (auto& [k, v] : post) v = spec.prior(k);
    return post;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (logit[i] == -std::numeric_limits<double>::infinity()) continue;
    const double e = std::exp(logit[i] - best);
    post[comps[i].class_label] += e;
    total += e;
  }
  for (auto& [k, v] : post) v /= total;
  return post;
}

double gm_class_posterior(const LatentGrid& x, int k, const MixtureSpec& spec) {
  if (!spec.has_class(k)) throw std::invalid_argument("class posterior: unknown class " + std::to_string(k));
  return gm_class_posteriors(x, spec).at(k);
}

}  // namespace spalign
