#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "spalign/grid.hpp"
#include "spalign/grid_io.hpp"
#include "spalign/metrics.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

fs::path workdir() {
  static const fs::path dir = [] {
    const auto d = fs::temp_directory_path() / "spalign_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  const auto p = workdir() / name;
  std::ofstream(p) << text;
  return p;
}

Result run(const std::string& args) {
  const auto out = workdir() / "stdout.txt";
  const auto err = workdir() / "stderr.txt";
  const std::string cmd = std::string(SPALIGN_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string dir(const std::string& name) { return (workdir() / name).string(); }

/// Data rows of a CSV artifact (skipping the schema and column lines).
std::vector<std::map<std::string, std::string>> rows(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line, header;
  std::getline(in, line);
  std::getline(in, header);
  auto split = [](const std::string& s) {
    std::vector<std::string> v;
    std::stringstream ss(s);
    std::string f;
    while (std::getline(ss, f, ',')) v.push_back(f);
    return v;
  };
  const auto cols = split(header);
  std::vector<std::map<std::string, std::string>> out;
  while (std::getline(in, line)) {
    const auto f = split(line);
    std::map<std::string, std::string> r;
    for (std::size_t i = 0; i < cols.size() && i < f.size(); ++i) r[cols[i]] = f[i];
    out.push_back(r);
  }
  return out;
}

const char* kMinimal = "schedule.steps = 20\nmodel.mixture = preset:two-class-grid\n";

}  // namespace

TEST_CASE("edit: minimal config writes three artifacts") {
  const auto cfg = write_config("min.cfg", kMinimal);
  const auto r = run("edit --config " + cfg.string() + " --out " + dir("edit1"));
  REQUIRE(r.code == 0);
  CHECK(fs::exists(workdir() / "edit1/output.csv"));
  CHECK(fs::exists(workdir() / "edit1/trace.csv"));
  CHECK(fs::exists(workdir() / "edit1/report.csv"));
  CHECK(r.out.rfind("edit method=pred-x0", 0) == 0);
  // Every artifact carries the config hash.
  const auto hash = r.out.substr(r.out.find("config_hash=") + 12, 16);
  for (const char* f : {"output.csv", "trace.csv", "report.csv"}) {
    CHECK(slurp(workdir() / "edit1" / f).find(hash) != std::string::npos);
  }
  CHECK(spalign::io::read_grid_csv(workdir() / "edit1/output.csv").shape() == (spalign::Shape{1, 4, 4}));
}

TEST_CASE("edit: fixed seed is byte-reproducible") {
  const auto cfg = write_config("seed.cfg", std::string(kMinimal) + "edit.seed = 17\n");
  REQUIRE(run("edit --config " + cfg.string() + " --out " + dir("rep1")).code == 0);
  REQUIRE(run("edit --config " + cfg.string() + " --out " + dir("rep2")).code == 0);
  for (const char* f : {"output.csv", "trace.csv", "report.csv", "output.pgm"}) {
    CHECK(slurp(workdir() / "rep1" / f) == slurp(workdir() / "rep2" / f));
  }
  REQUIRE(run("edit --config " + cfg.string() + " --seed 18 --out " + dir("rep3")).code == 0);
  CHECK(slurp(workdir() / "rep1/output.csv") != slurp(workdir() / "rep3/output.csv"));
}

TEST_CASE("edit: missing mixture file is a config error") {
  const auto cfg = write_config("missing.cfg", "model.mixture = no_such_mixture.txt\n");
  const auto r = run("edit --config " + cfg.string() + " --out " + dir("missing"));
  CHECK(r.code == 2);
  CHECK(r.err.rfind("config error:", 0) == 0);
}

TEST_CASE("edit: malformed mixture file is a model error") {
  std::ofstream(workdir() / "bad_mix.txt") << "shape = 2\ncomponent.0.class = 0\n";
  const auto cfg = write_config("badmix.cfg", "model.mixture = bad_mix.txt\n");
  const auto r = run("edit --config " + cfg.string() + " --out " + dir("badmix"));
  CHECK(r.code == 3);
  CHECK(r.err.rfind("model error:", 0) == 0);
}

TEST_CASE("unknown config keys and bad flags are config errors") {
  const auto cfg = write_config("unknown.cfg", "edit.colour = red\n");
  CHECK(run("edit --config " + cfg.string() + " --out " + dir("unknown")).code == 2);
  CHECK(run("edit --config " + cfg.string() + " --bogus").code == 2);
  CHECK(run("frobnicate --config " + cfg.string()).code == 2);
}

TEST_CASE("outputs are append-only unless --overwrite") {
  const auto cfg = write_config("ow.cfg", kMinimal);
  REQUIRE(run("edit --config " + cfg.string() + " --out " + dir("ow")).code == 0);
  const auto again = run("edit --config " + cfg.string() + " --out " + dir("ow"));
  CHECK(again.code == 2);
  CHECK(again.err.find("overwrite") != std::string::npos);
  CHECK(run("edit --config " + cfg.string() + " --out " + dir("ow") + " --overwrite").code == 0);
}

TEST_CASE("sweep: 1x1x1x1 grid equals edit") {
  const auto cfg = write_config("one.cfg", std::string(kMinimal) + "edit.seed = 3\nsweep.K = 200\nsweep.beta = 0.3\n");
  REQUIRE(run("edit --config " + cfg.string() + " --out " + dir("one_edit")).code == 0);
  REQUIRE(run("sweep --config " + cfg.string() + " --out " + dir("one_sweep")).code == 0);
  const auto e = rows(workdir() / "one_edit/report.csv");
  const auto s = rows(workdir() / "one_sweep/runs.csv");
  REQUIRE(e.size() == 1);
  REQUIRE(s.size() == 1);
  CHECK(e[0] == s[0]);
}

TEST_CASE("sweep: 3 K values x 20 seeds") {
  const auto cfg =
      write_config("k3.cfg", std::string(kMinimal) + "sweep.K = 100, 300, 600\nsweep.seeds = 0..19\n");
  const auto r = run("sweep --jobs 4 --config " + cfg.string() + " --out " + dir("k3"));
  REQUIRE(r.code == 0);
  CHECK(rows(workdir() / "k3/runs.csv").size() == 60);
  const auto t = rows(workdir() / "k3/tradeoff.csv");
  REQUIRE(t.size() == 3);
  for (const auto& row : t) CHECK(row.at("runs") == "20");
  CHECK(fs::exists(workdir() / "k3/timing.csv"));

  // Reproducible regardless of the job count.
  REQUIRE(run("sweep --jobs 1 --config " + cfg.string() + " --out " + dir("k3b")).code == 0);
  CHECK(slurp(workdir() / "k3/runs.csv") == slurp(workdir() / "k3b/runs.csv"));
  CHECK(slurp(workdir() / "k3/tradeoff.csv") == slurp(workdir() / "k3b/tradeoff.csv"));
}

TEST_CASE("baseline: injection at 0 preserves exactly") {
  const auto cfg = write_config("b0.cfg", std::string(kMinimal) + "baseline.t_inject = 0\n");
  REQUIRE(run("baseline --config " + cfg.string() + " --out " + dir("b0")).code == 0);
  const auto t = rows(workdir() / "b0/tradeoff.csv");
  REQUIRE(t.size() == 1);
  CHECK(t[0].at("method") == "sdedit");
  CHECK(t[0].at("mse_mean") == "0");
}

TEST_CASE("baseline: injection at T does not depend on the reference") {
  spalign::io::write_grid_csv(workdir() / "ref_a.csv", spalign::LatentGrid::filled(spalign::Shape{1, 4, 4}, 1.0));
  spalign::io::write_grid_csv(workdir() / "ref_b.csv", spalign::LatentGrid::filled(spalign::Shape{1, 4, 4}, -3.0));
  const std::string base = std::string(kMinimal) + "baseline.t_inject = 1000\nsweep.seeds = 0..4\n";
  const auto ca = write_config("bta.cfg", base + "reference.file = ref_a.csv\n");
  const auto cb = write_config("btb.cfg", base + "reference.file = ref_b.csv\n");
  REQUIRE(run("baseline --config " + ca.string() + " --out " + dir("bta")).code == 0);
  REQUIRE(run("baseline --config " + cb.string() + " --out " + dir("btb")).code == 0);
  const auto a = rows(workdir() / "bta/runs.csv");
  const auto b = rows(workdir() / "btb/runs.csv");
  REQUIRE(a.size() == 5);
  REQUIRE(b.size() == 5);
  // The reference only enters through the injected latent, whose weight is sqrt(alpha_bar[T]).
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(std::stod(a[i].at("strength")) - std::stod(b[i].at("strength"))) < 1e-3);
  }
}

TEST_CASE("baseline: 5-point injection sweep is monotone") {
  const auto cfg = write_config(
      "b5.cfg", std::string(kMinimal) + "baseline.t_inject = 0, 263, 526, 789, 1000\nsweep.seeds = 0..19\n");
  const auto r = run("baseline --jobs 2 --config " + cfg.string() + " --out " + dir("b5"));
  REQUIRE(r.code == 0);
  const auto t = rows(workdir() / "b5/tradeoff.csv");
  REQUIRE(t.size() == 5);
  std::vector<double> ts, mse;
  for (const auto& row : t) {
    ts.push_back(std::stod(row.at("t_inject")));
    mse.push_back(std::stod(row.at("mse_mean")));
  }
  CHECK(spalign::spearman(ts, mse) >= 0.9);
}

TEST_CASE("baseline: injection off the sub-step grid is a config error") {
  const auto cfg = write_config("boff.cfg", std::string(kMinimal) + "baseline.t_inject = 500\n");
  CHECK(run("baseline --config " + cfg.string() + " --out " + dir("boff")).code == 2);
}

TEST_CASE("check: default config passes") {
  const auto cfg = write_config("check.cfg", kMinimal);
  const auto r = run("check --config " + cfg.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("check denoiser-fd residual=") != std::string::npos);
  CHECK(r.out.find("check reconstruction-pred-x0 residual=") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("check: corrupted schedule file is a named failure") {
  std::ofstream(workdir() / "bad_schedule.csv") << "t,alpha_bar\n0,1\n1,0.9\n2,0.95\n3,0.5\n";
  const auto cfg = write_config("badsched.cfg", "schedule.file = bad_schedule.csv\nschedule.steps = 3\n");
  const auto r = run("check --config " + cfg.string());
  CHECK(r.code == 4);
  CHECK(r.out.find("check schedule") != std::string::npos);
  CHECK(r.out.find("FAIL") != std::string::npos);
  CHECK(r.err.find("schedule") != std::string::npos);
}

TEST_CASE("check: zero tolerance reports failures with residuals") {
  const auto cfg = write_config("tol0.cfg", std::string(kMinimal) + "check.tolerance = 0\n");
  const auto r = run("check --config " + cfg.string());
  CHECK(r.code == 4);
  CHECK(r.out.find("check denoiser-fd residual=") != std::string::npos);
  CHECK(r.out.find("FAIL") != std::string::npos);
}
