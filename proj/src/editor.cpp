#include "spalign/editor.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "spalign/error.hpp"
#include "spalign/grid_io.hpp"
#include "spalign/latent_ops.hpp"
#include "spalign/rng.hpp"
#include "spalign/sampler.hpp"

namespace spalign {

std::string to_string(SamplerKind kind) { return kind == SamplerKind::Ddim ? "ddim" : "ddpm"; }

SamplerKind parse_sampler(const std::string& text) {
  if (text == "ddim") return SamplerKind::Ddim;
  if (text == "ddpm") return SamplerKind::Ddpm;
  throw std::invalid_argument("unknown sampler '" + text + "'");
}

namespace {

double rms(const LatentGrid& g) {
  double acc = 0.0;
  for (double v : g.values()) acc += v * v;
  return std::sqrt(acc / static_cast<double>(g.size()));
}

LatentGrid guided_epsilon(const EpsilonModel& model, const LatentGrid& x, NoiseLevel level, Condition target,
                          GuidanceConfig g) {
  if (target.is_unconditional() || g.scale == 0.0) return model.predict(x, level, Condition::unconditional());
  if (g.scale == 1.0) return model.predict(x, level, target);
  return cfg_combine(model.predict(x, level, Condition::unconditional()), model.predict(x, level, target), g);
}

/// One reverse trajectory with its own random streams.
class Trajectory {
 public:
  Trajectory(const EpsilonModel& model, const NoiseSchedule& schedule, const EditRequest& req, AlignmentConfig cfg)
      : model_(model),
        schedule_(schedule),
        req_(req),
        cfg_(cfg),
        noise_(req.seed, streams::kTrajectory),
        align_noise_(req.seed, streams::kAlignment) {}

  void start_from_noise() { x_ = gaussian_grid(noise_, req_.reference.shape()); }
  void start_from(LatentGrid x) { x_ = std::move(x); }

  const LatentGrid& x() const noexcept { return x_; }
  void set_x(LatentGrid x) { x_ = std::move(x); }

  /// Advances from step_indices[pos] to step_indices[pos + 1].
  void step(std::size_t pos, TraceRecord* rec) {
    const auto idx = schedule_.step_indices();
    const int T = schedule_.T();
    const int t = idx[pos];
    const int t_prev = idx[pos + 1];
    const double ab = schedule_.alpha_bar(t);
    const double ab_prev = schedule_.alpha_bar(t_prev);
    const bool active = cfg_.active_at(t);
    const double beta = active ? beta_at(t, T, cfg_) : 0.0;
    const LatentGrid& ref = req_.reference;

    const LatentGrid eps = guided_epsilon(model_, x_, {t, ab}, req_.target, req_.guidance);
    LatentGrid eps_aligned = eps;
    if (active && cfg_.mode == AlignmentMode::Epsilon) {
      eps_aligned = align_epsilon(eps, x_, ref, t, cfg_.K, beta);
    } else if (active && cfg_.mode == AlignmentMode::EpsilonScaled) {
      eps_aligned = align_epsilon_scaled(eps, x_, ref, ab, t, cfg_.K, beta);
    }

    LatentGrid pred = pred_x0(x_, eps_aligned, ab);
    if (active && cfg_.mode == AlignmentMode::PredX0) pred = align_pred_x0(pred, ref, t, cfg_.K, beta);

    if (rec) {
      rec->t = t;
      rec->t_prev = t_prev;
      rec->alpha_bar = ab;
      rec->alpha_bar_prev = ab_prev;
      rec->aligned = active;
      rec->beta = beta;
      rec->x_mse = mean_squared_difference(x_, ref);
      rec->pred_mse = mean_squared_difference(pred, ref);
      rec->eps_rms_pre = rms(eps);
      rec->eps_rms_post = rms(eps_aligned);
      if (req_.snapshot_stride > 0 && pos % static_cast<std::size_t>(req_.snapshot_stride) == 0) {
        rec->x_t = x_;
        rec->pred_x0 = pred;
        rec->eps_pre = eps;
        rec->eps_post = eps_aligned;
      }
    }

    LatentGrid next;
    if (req_.sampler == SamplerKind::Ddim) {
      // Symmetry breaking keeps the raw guided estimate in the direction term. Without it the
      // direction uses the noise implied by the aligned pred, so both occurrences agree.
      // At beta = 0 the pred is untouched and re-deriving the noise would only add rounding.
      const bool pred_aligned = active && cfg_.mode == AlignmentMode::PredX0 && beta > 0.0;
      if (cfg_.symmetry_breaking) {
        next = ddim_update(pred, eps, ab_prev);
      } else if (pred_aligned) {
        next = ddim_update(pred, unmix(x_, std::sqrt(ab), pred, std::sqrt(1.0 - ab)), ab_prev);
      } else {
        next = ddim_update(pred, eps_aligned, ab_prev);
      }
    } else {
      next = ddpm_transition(x_, eps_aligned, ab, ab_prev, noise_);
    }
    if (active && cfg_.mode == AlignmentMode::Input) {
      const LatentGrid z = gaussian_grid(align_noise_, ref.shape());
      next = align_input(next, stochastic_inverse(ref, z, ab_prev), t, cfg_.K, beta);
    }
    x_ = std::move(next);
  }

 private:
  const EpsilonModel& model_;
  const NoiseSchedule& schedule_;
  const EditRequest& req_;
  AlignmentConfig cfg_;
  RngStream noise_;
  RngStream align_noise_;
  LatentGrid x_;
};

NoiseSchedule schedule_for(const EditRequest& req, const NoiseSchedule& schedule) {
  if (req.steps == 0) return schedule;
  const auto wanted = uniform_step_indices(schedule.T(), req.steps);
  const auto have = schedule.step_indices();
  if (std::equal(wanted.begin(), wanted.end(), have.begin(), have.end())) return schedule;
  return schedule.with_steps(req.steps);
}

void validate(const EditRequest& req, const EpsilonModel& model, const NoiseSchedule& schedule) {
  if (req.steps < 0) throw std::invalid_argument("edit: steps must be >= 1");
  if (!(req.reference.shape() == model.shape())) {
    throw std::invalid_argument("edit: reference shape " + req.reference.shape().to_string() +
                                " does not match model shape " + model.shape().to_string());
  }
  if (!std::isfinite(req.guidance.scale) || req.guidance.scale < 0.0) {
    throw std::invalid_argument("edit: guidance scale must be finite and >= 0");
  }
  req.alignment.validate(schedule.T());
  if (req.sampler == SamplerKind::Ddpm && req.alignment.mode == AlignmentMode::PredX0) {
    throw UnsupportedCombination("pred-x0 alignment needs the DDIM sampler");
  }
  if (req.snapshot_stride < 0) throw std::invalid_argument("edit: snapshot stride must be >= 0");
}

}  // namespace

void write_trace_csv(std::ostream& out, const EditTrace& trace, const std::string& config_hash) {
  out << "# " << kTraceSchema << " config_hash=" << config_hash << '\n';
  out << "step,t,t_prev,alpha_bar,alpha_bar_prev,aligned,beta,x_mse,pred_mse,eps_rms_pre,eps_rms_post\n";
  for (const auto& r : trace.records) {
    out << r.step << ',' << r.t << ',' << r.t_prev << ',' << io::format_double(r.alpha_bar) << ','
        << io::format_double(r.alpha_bar_prev) << ',' << (r.aligned ? 1 : 0) << ',' << io::format_double(r.beta) << ','
        << io::format_double(r.x_mse) << ',' << io::format_double(r.pred_mse) << ','
        << io::format_double(r.eps_rms_pre) << ',' << io::format_double(r.eps_rms_post) << '\n';
  }
}

EditResult run_edit(const EditRequest& req, const EpsilonModel& model, const NoiseSchedule& schedule_in) {
  validate(req, model, schedule_in);
  const NoiseSchedule schedule = schedule_for(req, schedule_in);
  Trajectory traj(model, schedule, req, req.alignment);
  traj.start_from_noise();
  EditTrace trace;
  const std::size_t n = schedule.step_indices().size();
  trace.records.resize(n - 1);
  for (std::size_t pos = 0; pos + 1 < n; ++pos) {
    trace.records[pos].step = static_cast<int>(pos);
    traj.step(pos, &trace.records[pos]);
  }
  return {traj.x(), std::move(trace)};
}

LatentGrid run_reconstruction(const LatentGrid& reference, const EpsilonModel& model, const NoiseSchedule& schedule,
                              AlignmentMode mode, std::uint64_t seed, Condition target, GuidanceConfig guidance) {
  EditRequest req;
  req.reference = reference;
  req.target = target;
  req.guidance = guidance;
  req.seed = seed;
  req.alignment = AlignmentConfig::reconstruction(mode);
  return run_edit(req, model, schedule).output;
}

LatentGrid run_sdedit_baseline(const LatentGrid& reference, int t_inject, Condition target, const EpsilonModel& model,
                               const NoiseSchedule& schedule, std::uint64_t seed, GuidanceConfig guidance) {
  const int start = schedule.step_position(t_inject);
  if (start < 0) throw std::invalid_argument("sdedit: t_inject " + std::to_string(t_inject) + " is not a visited sub-step");
  EditRequest req;
  req.reference = reference;
  req.target = target;
  req.guidance = guidance;
  req.seed = seed;
  req.alignment.mode = AlignmentMode::None;
  validate(req, model, schedule);

  Trajectory traj(model, schedule, req, req.alignment);
  RngStream injection(seed, streams::kTrajectory);
  const LatentGrid z = gaussian_grid(injection, reference.shape());
  traj.start_from(stochastic_inverse(reference, z, schedule.alpha_bar(t_inject)));
  const std::size_t n = schedule.step_indices().size();
  for (std::size_t pos = static_cast<std::size_t>(start); pos + 1 < n; ++pos) traj.step(pos, nullptr);
  return traj.x();
}

EditResult run_mixed_edit(const EditRequest& req, const EpsilonModel& model, const NoiseSchedule& schedule_in) {
  validate(req, model, schedule_in);
  std::optional<MixMask> mask = req.mask ? req.mask : model.mask_hint(req.target);
  if (!mask) throw std::invalid_argument("mixed edit: no mask given and the model offers none");
  if (!mask->compatible_with(req.reference.shape())) {
    throw std::invalid_argument("mixed edit: mask shape " + mask->shape().to_string() + " does not fit latent " +
                                req.reference.shape().to_string());
  }
  const NoiseSchedule schedule = schedule_for(req, schedule_in);

  AlignmentConfig free_cfg = req.alignment;
  free_cfg.mode = AlignmentMode::None;
  Trajectory aligned(model, schedule, req, req.alignment);
  Trajectory free(model, schedule, req, free_cfg);
  aligned.start_from_noise();
  free.start_from_noise();

  EditTrace trace;
  const auto idx = schedule.step_indices();
  const std::size_t n = idx.size();
  trace.records.resize(n - 1);
  for (std::size_t pos = 0; pos + 1 < n; ++pos) {
    auto& rec = trace.records[pos];
    rec.step = static_cast<int>(pos);
    aligned.step(pos, nullptr);
    free.step(pos, &rec);
    const int t = idx[pos];
    if (req.alignment.active_at(t)) {
      rec.aligned = true;
      rec.beta = beta_at(t, schedule.T(), req.alignment);
      free.set_x(mix_latents(aligned.x(), free.x(), *mask, t, req.alignment.K));
    }
  }
  return {free.x(), std::move(trace)};
}

}  // namespace spalign
