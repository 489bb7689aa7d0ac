#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace spalign {

enum class ScheduleKind { LinearBeta, Cosine };

std::string to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(const std::string& text);

struct ScheduleParams {
  double beta_start = 1e-4;
  double beta_end = 0.02;
  /// Offset s of the squared-cosine profile.
  double cosine_offset = 0.008;
  /// Per-step beta clamp for the cosine profile.
  double cosine_max_beta = 0.999;
};

/// Cumulative signal weights alpha_bar[t], t = 0..T, and the visited
/// sub-steps of the sampler.
///
/// Invariants: alpha_bar[0] == 1 exactly, strictly decreasing, all in (0, 1];
/// step_indices strictly decreasing, within [0, T], ending at 0, and with at
/// least two entries. The sampler evaluates the model at every entry except
/// the last and moves to the next entry.
class NoiseSchedule {
 public:
  NoiseSchedule(std::vector<double> alpha_bar, std::vector<int> step_indices);

  int T() const noexcept { return static_cast<int>(alpha_bar_.size()) - 1; }
  double alpha_bar(int t) const { return alpha_bar_.at(static_cast<std::size_t>(t)); }
  std::span<const double> alpha_bars() const noexcept { return alpha_bar_; }
  std::span<const int> step_indices() const noexcept { return steps_; }
  /// Per-step beta_t = 1 - alpha_bar[t] / alpha_bar[t-1], t >= 1.
  double beta(int t) const;

  /// Same alpha_bar table with a different sub-step count.
  NoiseSchedule with_steps(int steps) const;

  /// Position of timestep t in step_indices, or -1.
  int step_position(int t) const noexcept;

 private:
  std::vector<double> alpha_bar_;
  std::vector<int> steps_;
};

/// Uniform stride from T down to 0: entry k of n = max(steps, 2) entries is
/// round_half_up(T * (n-1-k) / (n-1)), computed in integers.
std::vector<int> uniform_step_indices(int T, int steps);

/// linear-beta: beta_t = beta_start + (beta_end - beta_start) * (t-1)/(T-1),
///   alpha_bar[t] = prod_{i<=t} (1 - beta_i).
/// cosine: f(t) = cos^2(((t/T + s) / (1 + s)) * pi/2),
///   beta_t = min(1 - f(t)/f(t-1), cosine_max_beta),
///   alpha_bar[t] = prod_{i<=t} (1 - beta_i).
NoiseSchedule build_schedule(int T, ScheduleKind kind, int steps, const ScheduleParams& params = {});

/// Problems with a raw alpha_bar table (empty when valid).
std::vector<std::string> schedule_problems(std::span<const double> alpha_bar);

// Schedule CSV:
//   # spalign-schedule v1 T=<T>
//   t,alpha_bar
//   0,1
//   ...
void write_schedule_csv(std::ostream& out, const NoiseSchedule& schedule, const std::string& config_hash = {});
/// Raw table without invariant checks; throws ParseError on malformed text.
std::vector<double> read_alpha_bar_csv(const std::filesystem::path& path);
/// Parsed and validated (ModelError when the table breaks an invariant).
NoiseSchedule read_schedule_csv(const std::filesystem::path& path, int steps);

}  // namespace spalign
