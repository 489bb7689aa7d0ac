#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <optional>
#include <vector>

#include "spalign/alignment.hpp"
#include "spalign/denoiser.hpp"
#include "spalign/grid.hpp"
#include "spalign/mixing.hpp"
#include "spalign/schedule.hpp"

namespace spalign {

enum class SamplerKind { Ddim, Ddpm };

std::string to_string(SamplerKind kind);
SamplerKind parse_sampler(const std::string& text);

/// One editing run: the encoded reference, the edit condition and every knob
/// of the reverse process.
struct EditRequest {
  LatentGrid reference;
  Condition target = Condition::unconditional();
  GuidanceConfig guidance;
  std::uint64_t seed = 0;
  SamplerKind sampler = SamplerKind::Ddim;
  /// Sub-step count; 0 keeps the schedule's own step indices.
  int steps = 0;
  AlignmentConfig alignment;
  std::optional<MixMask> mask;
  bool mixing = false;
  /// Keep grid snapshots every `snapshot_stride` sub-steps (0: none).
  int snapshot_stride = 0;
};

struct TraceRecord {
  int step = 0;
  int t = 0;
  int t_prev = 0;
  double alpha_bar = 0.0;
  double alpha_bar_prev = 0.0;
  bool aligned = false;
  double beta = 0.0;  // applied strength, 0 when not aligned
  double x_mse = 0.0;     // x_t against the reference
  double pred_mse = 0.0;  // x0 estimate (after alignment) against the reference
  double eps_rms_pre = 0.0;
  double eps_rms_post = 0.0;
  std::optional<LatentGrid> x_t;
  std::optional<LatentGrid> pred_x0;
  std::optional<LatentGrid> eps_pre;
  std::optional<LatentGrid> eps_post;
};

/// Per-sub-step records in visiting order (strictly decreasing t).
struct EditTrace {
  std::vector<TraceRecord> records;
};

struct EditResult {
  LatentGrid output;
  EditTrace trace;
};

/// Reverse diffusion from x_T ~ N(0, I) with alignment injected per mode:
///   input           the latent entering each step after the first is blended
///                   with the reference noised to that step's level (fresh z)
///   epsilon(-scaled) the guided noise prediction is blended before the update
///   pred-x0         the x0 estimate is blended inside the DDIM update
/// Guidance combines first; alignment acts on the combined prediction.
///
/// Random draws: stream 0 of the seed supplies x_T and DDPM noise, stream 1
/// the stochastic-inverse noise. Throws UnsupportedCombination for pred-x0
/// alignment with the DDPM sampler.
EditResult run_edit(const EditRequest& req, const EpsilonModel& model, const NoiseSchedule& schedule);

inline constexpr const char* kTraceSchema = "spalign-trace v1";

/// One row per sub-step; snapshots are not included.
void write_trace_csv(std::ostream& out, const EditTrace& trace, const std::string& config_hash = {});

/// Full-strength alignment (K = 0, beta = 1) in the given mode.
LatentGrid run_reconstruction(const LatentGrid& reference, const EpsilonModel& model, const NoiseSchedule& schedule,
                              AlignmentMode mode, std::uint64_t seed = 0,
                              Condition target = Condition::unconditional(), GuidanceConfig guidance = {0.0});

/// One-shot injection: x = stochastic_inverse(reference, z, ab[t_inject]),
/// then guided DDIM from t_inject to 0 without alignment. t_inject must be
/// one of the schedule's step indices.
LatentGrid run_sdedit_baseline(const LatentGrid& reference, int t_inject, Condition target, const EpsilonModel& model,
                               const NoiseSchedule& schedule, std::uint64_t seed, GuidanceConfig guidance = {});

/// Two trajectories from the same x_T: one aligned per the request, one free
/// (no alignment, same condition). After each step with t > K the free one is
/// replaced by mix_latents(aligned, free, M). The free trajectory is the
/// output. Uses req.mask, else the model's mask hint.
EditResult run_mixed_edit(const EditRequest& req, const EpsilonModel& model, const NoiseSchedule& schedule);

}  // namespace spalign
