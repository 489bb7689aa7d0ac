#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spalign/alignment.hpp"
#include "spalign/denoiser.hpp"
#include "spalign/grid.hpp"

namespace spalign {

// Preservation and edit strength are desk-scale proxies: MSE/PSNR against the
// reference instead of a perceptual distance, and the analytic class
// posterior of the edit target instead of a text-image similarity.

struct Preservation {
  double mse = 0.0;
  double psnr = 0.0;  // +inf when mse == 0
};

/// PSNR = 10 log10(range^2 / mse). Symmetric in its grid arguments.
Preservation preservation(const LatentGrid& x_out, const LatentGrid& reference, double dynamic_range);
double psnr_from_mse(double mse, double dynamic_range);

/// Posterior of the target class at t = 0.
double edit_strength(const LatentGrid& x_out, int target, const MixtureSpec& spec);

/// One finished run.
struct EditReport {
  std::string method;  // alignment mode name, or "sdedit"
  int K = 0;           // -1 for sdedit
  BetaLaw beta;
  int t_inject = -1;  // sdedit only
  std::string target = "uncond";
  double guidance = 0.0;
  std::uint64_t seed = 0;
  double dynamic_range = 1.0;
  double mse = 0.0;
  double psnr = 0.0;
  double strength = 0.0;
  double wall_ms = 0.0;
};

/// Summary over seeds of one (method, K, beta, t_inject) cell.
struct TradeoffRow {
  std::string method;
  int K = 0;
  BetaLaw beta;
  int t_inject = -1;
  std::size_t runs = 0;
  double mse_mean = 0.0;
  double mse_std = 0.0;  // sample standard deviation, 0 for a single run
  double psnr = 0.0;     // of mse_mean
  double strength_mean = 0.0;
  double strength_std = 0.0;
};

/// Groups reports by cell, ordered by (method, K, beta law, beta, t_inject).
/// Throws std::invalid_argument for an empty input.
std::vector<TradeoffRow> tradeoff_table(std::span<const EditReport> runs);

inline constexpr const char* kRunsSchema = "spalign-runs v1";
inline constexpr const char* kTradeoffSchema = "spalign-tradeoff v1";

/// Header line, column line, one row per report. Wall-clock time is only
/// written when `with_timing` is set, so sweep outputs stay reproducible.
void write_runs_csv(std::ostream& out, std::span<const EditReport> runs, const std::string& config_hash,
                    bool with_timing);
void write_tradeoff_csv(std::ostream& out, std::span<const TradeoffRow> rows, const std::string& config_hash,
                        double dynamic_range);

/// Spearman rank correlation with average ranks for ties; 0 when either
/// side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

/// Area dominated by (mse, strength) points, lower mse and higher strength
/// being better, bounded by the reference corner (mse_ref, strength_ref).
double hypervolume(std::span<const std::pair<double, double>> points, double mse_ref, double strength_ref = 0.0);

}  // namespace spalign
