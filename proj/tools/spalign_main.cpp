#include <iostream>
#include <string>
#include <utility>

#include "CLI11.hpp"
#include "spalign/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Latent spatial alignment editor on desk-scale diffusion models"};
  app.require_subcommand(1, 1);

  spalign::CliOptions opts;
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  const std::pair<const char*, const char*> commands[] = {
      {"edit", "one aligned edit: output grid, trace and report"},
      {"sweep", "aligned edits over modes x K x beta x seeds"},
      {"baseline", "noise-injection baseline over injection timesteps x seeds"},
      {"check", "self-checks of schedule, denoiser and reconstruction"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "key = value run configuration")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--jobs", opts.jobs, "concurrent runs for sweep and baseline");
    sub->add_option("--seed", seed, "overrides edit.seed");
    sub->add_flag("--overwrite", opts.overwrite, "replace existing artifacts");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return spalign::kExitConfig;
  }

  auto* sub = app.get_subcommands().front();
  opts.config = config;
  if (!out.empty()) opts.out = out;
  if (sub->count("--seed") > 0) opts.seed = seed;
  return spalign::run_command(sub->get_name(), opts, std::cout, std::cerr);
}
