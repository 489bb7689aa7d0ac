#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spalign/alignment.hpp"
#include "spalign/denoiser.hpp"
#include "spalign/editor.hpp"
#include "spalign/schedule.hpp"

namespace spalign {

/// `key = value` lines; '#' starts a comment line. Keys are unique.
/// Throws ConfigError naming the line on malformed input.
std::map<std::string, std::string> parse_key_values(const std::string& text, const std::string& name);

/// One published config key.
struct ConfigKey {
  std::string key;
  std::string default_value;  // empty: no default
  std::string help;
};

/// Every accepted key, in documentation order.
const std::vector<ConfigKey>& config_schema();

/// 64-bit FNV-1a, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Validated run configuration. Relative paths resolve against `base_dir`.
struct RunConfig {
  // schedule.*
  ScheduleKind schedule_kind = ScheduleKind::LinearBeta;
  int T = 1000;
  int steps = 50;
  ScheduleParams schedule_params;
  std::optional<std::filesystem::path> schedule_file;

  // model.*
  std::string model_kind = "mixture";  // mixture | mlp
  std::string mixture = "preset:two-class-grid";
  std::optional<std::filesystem::path> mlp_file;

  // reference.*
  std::optional<std::filesystem::path> reference_file;
  int reference_class = 0;

  // edit.*
  Condition target = Condition::of_class(1);
  double guidance = 10.0;
  std::uint64_t seed = 0;
  SamplerKind sampler = SamplerKind::Ddim;
  bool mixing = false;
  std::optional<std::filesystem::path> mask_file;
  int snapshot_stride = 0;

  AlignmentConfig alignment;

  // sweep.* and baseline.*
  std::vector<AlignmentMode> sweep_modes;
  std::vector<int> sweep_K;
  std::vector<double> sweep_beta;
  std::vector<std::uint64_t> seeds;
  std::vector<int> t_inject;

  // metrics.*, check.*
  std::optional<double> dynamic_range;
  double check_tolerance = 1e-6;
  int check_seeds = 5;

  std::filesystem::path base_dir = ".";
  /// Explicitly given entries after overrides; the hash covers these.
  std::map<std::string, std::string> entries;

  std::string hash() const;
  std::filesystem::path resolve(const std::filesystem::path& p) const;
};

/// Parses and validates. `overrides` replace file entries before
/// validation. Throws ConfigError.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir,
                           const std::map<std::string, std::string>& overrides = {},
                           const std::string& name = "<config>");
RunConfig load_run_config(const std::filesystem::path& path, const std::map<std::string, std::string>& overrides = {});

}  // namespace spalign
