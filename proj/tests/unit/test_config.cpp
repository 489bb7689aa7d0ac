#include <set>

#include "doctest.h"
#include "spalign/config.hpp"
#include "spalign/error.hpp"

using namespace spalign;

TEST_CASE("key-value parsing") {
  const auto kv = parse_key_values("# comment\n\n a = 1 \nb=two words\n", "t");
  CHECK(kv.size() == 2);
  CHECK(kv.at("a") == "1");
  CHECK(kv.at("b") == "two words");
  CHECK_THROWS_AS(parse_key_values("a = 1\na = 2\n", "t"), ConfigError);
  CHECK_THROWS_AS(parse_key_values("just text\n", "t"), ConfigError);
  CHECK_THROWS_AS(parse_key_values("= 3\n", "t"), ConfigError);
  try {
    parse_key_values("a = 1\n\nnope\n", "cfg");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("cfg:3") != std::string::npos);
  }
}

TEST_CASE("defaults of an empty config") {
  const auto c = parse_run_config("", ".");
  CHECK(c.T == 1000);
  CHECK(c.steps == 50);
  CHECK(c.alignment.mode == AlignmentMode::PredX0);
  CHECK(c.alignment.K == 200);
  CHECK(c.alignment.beta.value == 0.3);
  CHECK(c.guidance == 10.0);
  CHECK(c.target == Condition::of_class(1));
  CHECK(c.sweep_K == std::vector<int>{200});
  CHECK(c.seeds == std::vector<std::uint64_t>{0});
  CHECK(c.entries.empty());
}

TEST_CASE("K defaults to T/5 unless given") {
  CHECK(parse_run_config("schedule.T = 500\nschedule.steps = 25\n", ".").alignment.K == 100);
  CHECK(parse_run_config("schedule.T = 500\nalignment.K = 7\n", ".").alignment.K == 7);
}

TEST_CASE("unknown and malformed keys are rejected") {
  CHECK_THROWS_AS(parse_run_config("edit.sed = 3\n", "."), ConfigError);
  CHECK_THROWS_AS(parse_run_config("alignment.mode = sideways\n", "."), ConfigError);
  CHECK_THROWS_AS(parse_run_config("schedule.T = ten\n", "."), ConfigError);
  CHECK_THROWS_AS(parse_run_config("edit.guidance = -1\n", "."), ConfigError);
  CHECK_THROWS_AS(parse_run_config("sweep.beta = 0.5, 1.5\n", "."), ConfigError);
  CHECK_THROWS_AS(parse_run_config("edit.mixing = true\n", "."), ConfigError);
  CHECK_THROWS_AS(parse_run_config("model.kind = mlp\n", "."), ConfigError);
  CHECK_THROWS_AS(parse_run_config("edit.target = \n", "."), ConfigError);
  CHECK_THROWS_AS(parse_run_config("sweep.seeds = 5..2\n", "."), ConfigError);
}

TEST_CASE("lists and seed ranges") {
  const auto c = parse_run_config(
      "sweep.modes = pred-x0, input\nsweep.K = 0 200 400\nsweep.beta = 0.1,0.3\nsweep.seeds = 0..3, 10\n", ".");
  CHECK(c.sweep_modes == std::vector<AlignmentMode>{AlignmentMode::PredX0, AlignmentMode::Input});
  CHECK(c.sweep_K == std::vector<int>{0, 200, 400});
  CHECK(c.sweep_beta == std::vector<double>{0.1, 0.3});
  CHECK(c.seeds == std::vector<std::uint64_t>{0, 1, 2, 3, 10});
}

TEST_CASE("overrides replace file entries before validation") {
  const auto c = parse_run_config("edit.seed = 4\n", ".", {{"edit.seed", "9"}});
  CHECK(c.seed == 9);
  CHECK(c.seeds == std::vector<std::uint64_t>{9});
  CHECK_THROWS_AS(parse_run_config("", ".", {{"bogus", "1"}}), ConfigError);
}

TEST_CASE("config hash is stable and order-independent") {
  const auto a = parse_run_config("edit.seed = 1\nalignment.K = 300\n", ".");
  const auto b = parse_run_config("alignment.K = 300\n# note\nedit.seed = 1\n", ".");
  const auto c = parse_run_config("edit.seed = 2\nalignment.K = 300\n", ".");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(a.hash().size() == 16);
  // Published FNV-1a 64 test vectors.
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("relative paths resolve against the config directory") {
  const auto c = parse_run_config("model.mixture = m.txt\n", "/data/run");
  CHECK(c.resolve("m.txt") == std::filesystem::path("/data/run/m.txt"));
  CHECK(c.resolve("/abs/m.txt") == std::filesystem::path("/abs/m.txt"));
  CHECK_THROWS_AS(load_run_config("/nonexistent/dir/run.cfg"), ConfigError);
}

TEST_CASE("schema keys are unique") {
  std::set<std::string> seen;
  for (const auto& k : config_schema()) {
    CHECK(seen.insert(k.key).second);
    CHECK_FALSE(k.help.empty());
  }
  CHECK(seen.count("alignment.symmetry_breaking"));
}
