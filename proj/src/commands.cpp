#include "spalign/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <exception>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

#include "spalign/editor.hpp"
#include "spalign/error.hpp"
#include "spalign/grid_io.hpp"
#include "spalign/latent_ops.hpp"
#include "spalign/metrics.hpp"
#include "spalign/mixing.hpp"
#include "spalign/mlp.hpp"
#include "spalign/rng.hpp"
#include "spalign/sampler.hpp"

namespace spalign {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

fs::path output_dir(const CliOptions& opts) {
  if (!opts.out) throw ConfigError("--out DIR is required for this command");
  return *opts.out;
}

/// Refuses to replace existing artifacts unless --overwrite was given.
void claim_outputs(const fs::path& dir, const std::vector<std::string>& names, bool overwrite) {
  for (const auto& n : names) {
    if (fs::exists(dir / n) && !overwrite) {
      throw ConfigError("output '" + (dir / n).string() + "' already exists (pass --overwrite to replace it)");
    }
  }
  fs::create_directories(dir);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  return f;
}

EditRequest make_request(const RunConfig& cfg, const Engine& engine, std::uint64_t seed) {
  EditRequest req;
  req.reference = reference_for(cfg, engine, seed);
  req.target = cfg.target;
  req.guidance.scale = cfg.guidance;
  req.seed = seed;
  req.sampler = cfg.sampler;
  req.alignment = cfg.alignment;
  req.mixing = cfg.mixing;
  req.snapshot_stride = cfg.snapshot_stride;
  if (cfg.mask_file) req.mask = load_mask(cfg.resolve(*cfg.mask_file), req.reference.shape());
  return req;
}

std::string method_name(const RunConfig& cfg, AlignmentMode mode) {
  return cfg.mixing ? to_string(mode) + "+mix" : to_string(mode);
}

EditReport report_for(const Engine& engine, const EditRequest& req, const LatentGrid& output,
                      std::string method, double wall_ms) {
  EditReport r;
  r.method = std::move(method);
  r.K = req.alignment.K;
  r.beta = req.alignment.beta;
  r.target = req.target.to_string();
  r.guidance = req.guidance.scale;
  r.seed = req.seed;
  r.dynamic_range = engine.dynamic_range;
  const auto p = preservation(output, req.reference, engine.dynamic_range);
  r.mse = p.mse;
  r.psnr = p.psnr;
  r.strength = req.target.is_unconditional() ? std::numeric_limits<double>::quiet_NaN()
                                             : edit_strength(output, req.target.label(), engine.mixture);
  r.wall_ms = wall_ms;
  return r;
}

EditResult execute(const EditRequest& req, const Engine& engine) {
  return req.mixing ? run_mixed_edit(req, *engine.model, engine.schedule) : run_edit(req, *engine.model, engine.schedule);
}

void write_timing_csv(const fs::path& path, const std::vector<EditReport>& runs, const std::string& hash) {
  auto f = open_out(path);
  f << "# spalign-timing v1 config_hash=" << hash << '\n';
  f << "index,method,K,beta,t_inject,seed,wall_ms\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    f << i << ',' << r.method << ',' << r.K << ',' << io::format_double(r.beta.value) << ',' << r.t_inject << ','
      << r.seed << ',' << io::format_double(r.wall_ms) << '\n';
  }
}

void write_tables(const fs::path& dir, const std::vector<EditReport>& runs, const RunConfig& cfg,
                  const Engine& engine) {
  const std::string hash = cfg.hash();
  {
    auto f = open_out(dir / "runs.csv");
    write_runs_csv(f, runs, hash, false);
  }
  {
    auto f = open_out(dir / "tradeoff.csv");
    const auto rows = tradeoff_table(runs);
    write_tradeoff_csv(f, rows, hash, engine.dynamic_range);
  }
  write_timing_csv(dir / "timing.csv", runs, hash);
}

/// Runs job(i) for i in [0, n) on up to `jobs` threads; the first failure
/// (lowest index) is rethrown after the loop.
template <typename Job>
void parallel_runs(std::size_t n, int jobs, Job&& job) {
  std::vector<std::exception_ptr> errors(n);
  const long count = static_cast<long>(n);
#pragma omp parallel for num_threads(jobs) schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    try {
      job(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Independent log-density oracle for the self-check: central differences of
// log sum_i w_i N(x; sqrt(ab) mu_i, (ab s_i^2 + 1 - ab) I).
double log_diffused_density(const std::vector<double>& x, double ab, Condition cond, const MixtureSpec& spec) {
  const auto comps = spec.components();
  const double d = static_cast<double>(x.size());
  std::vector<double> terms;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const auto& c = comps[i];
    if (!cond.is_unconditional() && c.class_label != cond.label()) continue;
    const double w = cond.is_unconditional() ? spec.global_weight(i) : c.weight;
    if (w <= 0.0) continue;
    const double var = ab * c.variance + 1.0 - ab;
    double sq = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double r = x[j] - std::sqrt(ab) * c.mean[j];
      sq += r * r;
    }
    terms.push_back(std::log(w) - 0.5 * d * std::log(2.0 * std::numbers::pi * var) - 0.5 * sq / var);
  }
  double m = -std::numeric_limits<double>::infinity();
  for (double t : terms) m = std::max(m, t);
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

double fd_residual(const MixtureSpec& spec, std::uint64_t seed) {
  RngStream rng(seed, 7);
  double worst = 0.0;
  std::vector<Condition> conds{Condition::unconditional()};
  for (int k : spec.classes()) conds.push_back(Condition::of_class(k));
  for (double ab : {0.05, 0.3, 0.7, 0.95}) {
    for (int trial = 0; trial < 3; ++trial) {
      const LatentGrid x = gaussian_grid(rng, spec.shape());
      for (const auto& cond : conds) {
        const LatentGrid eps = gm_epsilon(x, ab, cond, spec);
        std::vector<double> v(x.values().begin(), x.values().end());
        const double h = 1e-5;
        for (std::size_t j = 0; j < v.size(); ++j) {
          const double keep = v[j];
          v[j] = keep + h;
          const double up = log_diffused_density(v, ab, cond, spec);
          v[j] = keep - h;
          const double down = log_diffused_density(v, ab, cond, spec);
          v[j] = keep;
          const double oracle = -std::sqrt(1.0 - ab) * (up - down) / (2.0 * h);
          worst = std::max(worst, std::abs(oracle - eps[j]));
        }
      }
    }
  }
  return worst;
}

struct CheckLine {
  std::string name;
  double residual = 0.0;
  bool skipped = false;
  std::string note;
};

}  // namespace

MixtureSpec load_mixture(const RunConfig& cfg) {
  const std::string& m = cfg.mixture;
  if (m.rfind("preset:", 0) == 0) return presets::by_name(m.substr(7));
  return read_mixture_file(cfg.resolve(m));
}

Engine build_engine(RunConfig& cfg) {
  NoiseSchedule schedule = cfg.schedule_file ? read_schedule_csv(cfg.resolve(*cfg.schedule_file), cfg.steps)
                                             : build_schedule(cfg.T, cfg.schedule_kind, cfg.steps, cfg.schedule_params);
  if (!cfg.entries.count("alignment.K")) cfg.alignment.K = schedule.T() / 5;
  if (!cfg.entries.count("sweep.K")) cfg.sweep_K = {cfg.alignment.K};
  MixtureSpec mixture = load_mixture(cfg);
  std::unique_ptr<EpsilonModel> model;
  if (cfg.model_kind == "mlp") {
    auto mlp = std::make_unique<MlpDenoiser>(read_mlp(cfg.resolve(*cfg.mlp_file)));
    if (!(mlp->shape() == mixture.shape())) {
      throw ModelError("mlp shape " + mlp->shape().to_string() + " does not match mixture shape " +
                       mixture.shape().to_string());
    }
    model = std::move(mlp);
  } else {
    model = std::make_unique<GaussianMixtureDenoiser>(mixture);
  }
  const double range = cfg.dynamic_range ? *cfg.dynamic_range : mixture.mean_spread();
  return Engine{std::move(schedule), std::move(mixture), std::move(model), range};
}

LatentGrid reference_for(const RunConfig& cfg, const Engine& engine, std::uint64_t seed) {
  if (cfg.reference_file) {
    LatentGrid ref = io::read_grid(cfg.resolve(*cfg.reference_file), engine.mixture.shape());
    if (!(ref.shape() == engine.mixture.shape())) {
      throw ModelError("reference shape " + ref.shape().to_string() + " does not match model shape " +
                       engine.mixture.shape().to_string());
    }
    return ref;
  }
  if (!engine.mixture.has_class(cfg.reference_class)) {
    throw ConfigError("reference.class " + std::to_string(cfg.reference_class) + " is not a class of the mixture");
  }
  return sample_reference(engine.mixture, cfg.reference_class, seed);
}

int cmd_edit(RunConfig cfg, const CliOptions& opts, std::ostream& out) {
  const fs::path dir = output_dir(opts);
  const Engine engine = build_engine(cfg);
  const EditRequest req = make_request(cfg, engine, cfg.seed);
  claim_outputs(dir, {"output.csv", "trace.csv", "report.csv"}, opts.overwrite);

  const auto start = Clock::now();
  const EditResult result = execute(req, engine);
  const double wall = elapsed_ms(start);
  const EditReport report = report_for(engine, req, result.output, method_name(cfg, cfg.alignment.mode), wall);

  const std::string hash = cfg.hash();
  io::write_grid_csv(dir / "output.csv", result.output, hash);
  {
    auto f = open_out(dir / "trace.csv");
    write_trace_csv(f, result.trace, hash);
  }
  {
    auto f = open_out(dir / "report.csv");
    write_runs_csv(f, std::vector<EditReport>{report}, hash, false);
  }
  const bool image = result.output.shape().rank() >= 2;
  if (image) io::write_grid_pgm(dir / "output.pgm", result.output, hash);
  if (cfg.snapshot_stride > 0) {
    const fs::path snaps = dir / "snapshots";
    fs::create_directories(snaps);
    for (const auto& rec : result.trace.records) {
      if (!rec.x_t) continue;
      char stem[32];
      std::snprintf(stem, sizeof stem, "step_%03d", rec.step);
      if (image) {
        io::write_grid_pgm(snaps / (std::string(stem) + "_x.pgm"), *rec.x_t, hash);
        io::write_grid_pgm(snaps / (std::string(stem) + "_pred.pgm"), *rec.pred_x0, hash);
      } else {
        io::write_grid_csv(snaps / (std::string(stem) + "_x.csv"), *rec.x_t, hash);
        io::write_grid_csv(snaps / (std::string(stem) + "_pred.csv"), *rec.pred_x0, hash);
      }
    }
  }
  out << "edit method=" << report.method << " K=" << report.K << " beta=" << io::format_double(report.beta.value)
      << " seed=" << report.seed << " mse=" << io::format_double(report.mse)
      << " psnr=" << io::format_double(report.psnr) << " strength=" << io::format_double(report.strength)
      << " wall_ms=" << io::format_double(wall) << " config_hash=" << hash << '\n';
  return kExitOk;
}

int cmd_sweep(RunConfig cfg, const CliOptions& opts, std::ostream& out) {
  const fs::path dir = output_dir(opts);
  const Engine engine = build_engine(cfg);
  claim_outputs(dir, {"runs.csv", "tradeoff.csv", "timing.csv"}, opts.overwrite);

  struct Cell {
    AlignmentMode mode;
    int K;
    double beta;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (auto mode : cfg.sweep_modes) {
    for (int K : cfg.sweep_K) {
      for (double b : cfg.sweep_beta) {
        for (auto s : cfg.seeds) cells.push_back({mode, K, b, s});
      }
    }
  }
  std::vector<EditReport> runs(cells.size());
  parallel_runs(cells.size(), opts.jobs, [&](std::size_t i) {
    const Cell& c = cells[i];
    EditRequest req = make_request(cfg, engine, c.seed);
    req.alignment.mode = c.mode;
    req.alignment.K = c.K;
    req.alignment.beta.value = c.beta;
    const auto start = Clock::now();
    const EditResult result = execute(req, engine);
    runs[i] = report_for(engine, req, result.output, method_name(cfg, c.mode), elapsed_ms(start));
  });
  write_tables(dir, runs, cfg, engine);
  out << "sweep runs=" << runs.size() << " cells=" << tradeoff_table(runs).size() << " config_hash=" << cfg.hash()
      << '\n';
  return kExitOk;
}

int cmd_baseline(RunConfig cfg, const CliOptions& opts, std::ostream& out) {
  const fs::path dir = output_dir(opts);
  if (cfg.t_inject.empty()) throw ConfigError("baseline.t_inject: at least one injection timestep is required");
  const Engine engine = build_engine(cfg);
  for (int t : cfg.t_inject) {
    if (engine.schedule.step_position(t) < 0) {
      throw ConfigError("baseline.t_inject: " + std::to_string(t) + " is not a visited sub-step");
    }
  }
  claim_outputs(dir, {"runs.csv", "tradeoff.csv", "timing.csv"}, opts.overwrite);

  struct Cell {
    int t_inject;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (int t : cfg.t_inject) {
    for (auto s : cfg.seeds) cells.push_back({t, s});
  }
  std::vector<EditReport> runs(cells.size());
  parallel_runs(cells.size(), opts.jobs, [&](std::size_t i) {
    const Cell& c = cells[i];
    EditRequest req = make_request(cfg, engine, c.seed);
    req.alignment.mode = AlignmentMode::None;
    req.alignment.K = 0;
    req.alignment.beta = BetaLaw::constant(0.0);
    const auto start = Clock::now();
    const LatentGrid output = run_sdedit_baseline(req.reference, c.t_inject, req.target, *engine.model,
                                                  engine.schedule, c.seed, req.guidance);
    runs[i] = report_for(engine, req, output, "sdedit", elapsed_ms(start));
    runs[i].K = -1;
    runs[i].t_inject = c.t_inject;
  });
  write_tables(dir, runs, cfg, engine);
  out << "baseline runs=" << runs.size() << " cells=" << tradeoff_table(runs).size() << " config_hash=" << cfg.hash()
      << '\n';
  return kExitOk;
}

int cmd_check(RunConfig cfg, const CliOptions&, std::ostream& out) {
  std::vector<CheckLine> lines;
  bool schedule_ok = true;
  if (cfg.schedule_file) {
    const auto raw = read_alpha_bar_csv(cfg.resolve(*cfg.schedule_file));
    const auto problems = schedule_problems(raw);
    CheckLine line{"schedule", static_cast<double>(problems.size()), false, {}};
    for (const auto& p : problems) line.note += (line.note.empty() ? "" : "; ") + p;
    lines.push_back(line);
    schedule_ok = problems.empty();
  } else {
    const auto s = build_schedule(cfg.T, cfg.schedule_kind, cfg.steps, cfg.schedule_params);
    const auto problems = schedule_problems(s.alpha_bars());
    lines.push_back({"schedule", static_cast<double>(problems.size()), false, {}});
  }

  if (schedule_ok) {
    const Engine engine = build_engine(cfg);
    if (cfg.model_kind == "mixture") {
      lines.push_back({"denoiser-fd", fd_residual(engine.mixture, cfg.seed), false, {}});
    } else {
      lines.push_back({"denoiser-fd", 0.0, true, "needs the analytic mixture backend"});
    }

    double identity = 0.0;
    for (int s = 0; s < cfg.check_seeds; ++s) {
      RngStream rng(cfg.seed + static_cast<std::uint64_t>(s), 8);
      const LatentGrid x0 = gaussian_grid(rng, engine.mixture.shape());
      const LatentGrid eps = gaussian_grid(rng, engine.mixture.shape());
      for (int t : engine.schedule.step_indices()) {
        const double ab = engine.schedule.alpha_bar(t);
        identity = std::max(identity, max_abs_diff(pred_x0(forward_diffuse(x0, eps, ab), eps, ab), x0));
      }
    }
    lines.push_back({"forward-pred-roundtrip", identity, false, {}});

    for (auto mode : {AlignmentMode::PredX0, AlignmentMode::Input, AlignmentMode::EpsilonScaled}) {
      double worst = 0.0;
      for (int s = 0; s < cfg.check_seeds; ++s) {
        const auto seed = cfg.seed + static_cast<std::uint64_t>(s);
        const LatentGrid ref = reference_for(cfg, engine, seed);
        const GuidanceConfig g{cfg.guidance};
        const LatentGrid o = run_reconstruction(ref, *engine.model, engine.schedule, mode, seed, cfg.target, g);
        worst = std::max(worst, max_abs_diff(o, ref));
      }
      lines.push_back({"reconstruction-" + to_string(mode), worst, false, {}});
    }
  } else {
    for (const char* name : {"denoiser-fd", "forward-pred-roundtrip", "reconstruction"}) {
      lines.push_back({name, 0.0, true, "schedule invalid"});
    }
  }

  std::vector<std::string> failed;
  for (const auto& l : lines) {
    out << "check " << l.name << ' ';
    if (l.skipped) {
      out << "SKIP (" << l.note << ")\n";
      continue;
    }
    const bool pass = l.residual <= cfg.check_tolerance;
    out << "residual=" << io::format_double(l.residual) << " tol=" << io::format_double(cfg.check_tolerance) << ' '
        << (pass ? "PASS" : "FAIL");
    if (!l.note.empty()) out << " (" << l.note << ')';
    out << '\n';
    if (!pass) failed.push_back(l.name);
  }
  if (failed.empty()) return kExitOk;
  std::string names;
  for (const auto& f : failed) names += (names.empty() ? "" : ", ") + f;
  throw CheckFailure("failed checks: " + names);
}

int run_command(const std::string& command, const CliOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    if (opts.jobs < 1) throw ConfigError("--jobs must be >= 1");
    std::map<std::string, std::string> overrides;
    if (opts.seed) overrides["edit.seed"] = std::to_string(*opts.seed);
    RunConfig cfg = load_run_config(opts.config, overrides);
    if (command == "edit") return cmd_edit(std::move(cfg), opts, out);
    if (command == "sweep") return cmd_sweep(std::move(cfg), opts, out);
    if (command == "baseline") return cmd_baseline(std::move(cfg), opts, out);
    if (command == "check") return cmd_check(std::move(cfg), opts, out);
    throw ConfigError("unknown command '" + command + "'");
  } catch (const CheckFailure& e) {
    err << "check error: " << e.what() << '\n';
    return kExitCheckFailed;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ModelError& e) {
    err << "model error: " << e.what() << '\n';
    return kExitModel;
  } catch (const std::logic_error& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace spalign
