#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "spalign/config.hpp"
#include "spalign/denoiser.hpp"
#include "spalign/mixture.hpp"
#include "spalign/schedule.hpp"

namespace spalign {

enum ExitCode : int {
  kExitOk = 0,
  kExitRuntime = 1,
  kExitConfig = 2,
  kExitModel = 3,
  kExitCheckFailed = 4,
};

struct CliOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  bool overwrite = false;
};

/// Shared read-only objects of a run.
struct Engine {
  NoiseSchedule schedule;
  MixtureSpec mixture;
  std::unique_ptr<EpsilonModel> model;
  double dynamic_range = 1.0;
};

/// "preset:<name>" or a mixture file path.
MixtureSpec load_mixture(const RunConfig& cfg);
/// Also settles the T-dependent defaults of `cfg` (alignment.K, sweep.K).
Engine build_engine(RunConfig& cfg);
/// The reference for one seed: reference.file if set, else a sample of
/// reference.class.
LatentGrid reference_for(const RunConfig& cfg, const Engine& engine, std::uint64_t seed);

// Each command writes its artifacts under opts.out and returns an exit code;
// errors propagate as exceptions (see run_command).
int cmd_edit(RunConfig cfg, const CliOptions& opts, std::ostream& out);
int cmd_sweep(RunConfig cfg, const CliOptions& opts, std::ostream& out);
int cmd_baseline(RunConfig cfg, const CliOptions& opts, std::ostream& out);
int cmd_check(RunConfig cfg, const CliOptions& opts, std::ostream& out);

/// Loads the config (applying --seed), dispatches, and maps errors to exit
/// codes with a "<category> error: ..." line on `err`.
int run_command(const std::string& command, const CliOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace spalign
