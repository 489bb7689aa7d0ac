#include "spalign/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "spalign/error.hpp"
#include "spalign/grid_io.hpp"

namespace spalign {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

template <typename T>
T parse_integer(const std::string& key, const std::string& text) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) throw ConfigError(key + ": expected an integer, got '" + text + "'");
  return v;
}

double parse_real(const std::string& key, const std::string& text) {
  try {
    return io::parse_double(text);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

/// "0..19" (inclusive) or a plain integer.
void append_seeds(const std::string& key, const std::string& item, std::vector<std::uint64_t>& out) {
  const auto dots = item.find("..");
  if (dots == std::string::npos) {
    out.push_back(parse_integer<std::uint64_t>(key, item));
    return;
  }
  const auto lo = parse_integer<std::uint64_t>(key, item.substr(0, dots));
  const auto hi = parse_integer<std::uint64_t>(key, item.substr(dots + 2));
  if (hi < lo) throw ConfigError(key + ": empty range '" + item + "'");
  if (hi - lo >= 1000000) throw ConfigError(key + ": range '" + item + "' is too large");
  for (auto s = lo; s <= hi; ++s) out.push_back(s);
}

template <typename F>
auto wrap_invalid(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::logic_error& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text, const std::string& name) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    const std::string where = name + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (!kv.emplace(key, value).second) throw ConfigError(where + ": duplicate key '" + key + "'");
  }
  return kv;
}

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = {
      {"schedule.kind", "linear-beta", "linear-beta | cosine"},
      {"schedule.T", "1000", "training timesteps"},
      {"schedule.steps", "50", "sampler sub-steps"},
      {"schedule.beta_start", "0.0001", "linear-beta first beta"},
      {"schedule.beta_end", "0.02", "linear-beta last beta"},
      {"schedule.cosine_offset", "0.008", "cosine offset s"},
      {"schedule.file", "", "alpha_bar CSV; replaces the built schedule"},
      {"model.kind", "mixture", "mixture | mlp"},
      {"model.mixture", "preset:two-class-grid", "preset:<name> or mixture file; also scores edit strength"},
      {"model.mlp", "", "MLP weight file (model.kind = mlp)"},
      {"reference.file", "", "reference grid (.csv or .pgm); default samples the mixture"},
      {"reference.class", "0", "class sampled for the reference when no file is given"},
      {"edit.target", "1", "target class or 'uncond'"},
      {"edit.guidance", "10", "classifier-free guidance scale"},
      {"edit.seed", "0", "run seed"},
      {"edit.sampler", "ddim", "ddim | ddpm"},
      {"edit.mixing", "false", "semantic latent mixing with edit.mask"},
      {"edit.mask", "", "mask image (.pgm, 8- or 16-bit)"},
      {"edit.snapshot_stride", "0", "PGM snapshots every n sub-steps (0: none)"},
      {"alignment.mode", "pred-x0", "none | input | epsilon | epsilon-scaled | pred-x0"},
      {"alignment.K", "", "cutoff timestep; default T/5"},
      {"alignment.beta.law", "constant", "constant | linear"},
      {"alignment.beta.value", "0.3", "constant beta or linear ceiling"},
      {"alignment.symmetry_breaking", "false", "raw noise estimate in the DDIM direction term"},
      {"sweep.modes", "", "list; default alignment.mode"},
      {"sweep.K", "", "list; default alignment.K"},
      {"sweep.beta", "", "list; default alignment.beta.value"},
      {"sweep.seeds", "", "list of seeds or a..b ranges; default edit.seed"},
      {"baseline.t_inject", "", "list of injection timesteps (must be visited sub-steps)"},
      {"metrics.dynamic_range", "", "PSNR range; default the mixture's mean spread"},
      {"check.tolerance", "1e-6", "residual bound for the self-checks"},
      {"check.seeds", "5", "seeds per reconstruction check"},
  };
  return schema;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string RunConfig::hash() const {
  std::string canon;
  for (const auto& [k, v] : entries) canon += k + "=" + v + "\n";
  return fnv1a_hex(canon);
}

std::filesystem::path RunConfig::resolve(const std::filesystem::path& p) const {
  return p.is_absolute() ? p : base_dir / p;
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir,
                           const std::map<std::string, std::string>& overrides, const std::string& name) {
  auto kv = parse_key_values(text, name);
  for (const auto& [k, v] : overrides) kv[k] = v;

  std::set<std::string> known;
  for (const auto& k : config_schema()) known.insert(k.key);
  for (const auto& [k, v] : kv) {
    if (!known.count(k)) throw ConfigError(name + ": unknown key '" + k + "'");
    if (v.empty()) throw ConfigError(name + ": key '" + k + "' has an empty value");
  }

  RunConfig c;
  c.base_dir = base_dir;
  c.entries = kv;
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };

  if (auto v = get("schedule.kind")) c.schedule_kind = wrap_invalid("schedule.kind", [&] { return parse_schedule_kind(*v); });
  if (auto v = get("schedule.T")) c.T = parse_integer<int>("schedule.T", *v);
  if (auto v = get("schedule.steps")) c.steps = parse_integer<int>("schedule.steps", *v);
  if (auto v = get("schedule.beta_start")) c.schedule_params.beta_start = parse_real("schedule.beta_start", *v);
  if (auto v = get("schedule.beta_end")) c.schedule_params.beta_end = parse_real("schedule.beta_end", *v);
  if (auto v = get("schedule.cosine_offset")) c.schedule_params.cosine_offset = parse_real("schedule.cosine_offset", *v);
  if (auto v = get("schedule.file")) c.schedule_file = *v;
  if (c.steps < 1) throw ConfigError("schedule.steps: must be >= 1");
  if (c.T < 1 && !c.schedule_file) throw ConfigError("schedule.T: must be >= 1");

  if (auto v = get("model.kind")) c.model_kind = *v;
  if (c.model_kind != "mixture" && c.model_kind != "mlp") {
    throw ConfigError("model.kind: expected mixture or mlp, got '" + c.model_kind + "'");
  }
  if (auto v = get("model.mixture")) c.mixture = *v;
  if (auto v = get("model.mlp")) c.mlp_file = *v;
  if (c.model_kind == "mlp" && !c.mlp_file) throw ConfigError("model.mlp: required when model.kind = mlp");

  if (auto v = get("reference.file")) c.reference_file = *v;
  if (auto v = get("reference.class")) c.reference_class = parse_integer<int>("reference.class", *v);

  if (auto v = get("edit.target")) c.target = wrap_invalid("edit.target", [&] { return Condition::parse(*v); });
  if (auto v = get("edit.guidance")) c.guidance = parse_real("edit.guidance", *v);
  if (!(c.guidance >= 0.0) || !std::isfinite(c.guidance)) throw ConfigError("edit.guidance: must be finite and >= 0");
  if (auto v = get("edit.seed")) c.seed = parse_integer<std::uint64_t>("edit.seed", *v);
  if (auto v = get("edit.sampler")) c.sampler = wrap_invalid("edit.sampler", [&] { return parse_sampler(*v); });
  if (auto v = get("edit.mixing")) c.mixing = parse_bool("edit.mixing", *v);
  if (auto v = get("edit.mask")) c.mask_file = *v;
  if (c.mixing && !c.mask_file) throw ConfigError("edit.mask: required when edit.mixing = true");
  if (auto v = get("edit.snapshot_stride")) c.snapshot_stride = parse_integer<int>("edit.snapshot_stride", *v);
  if (c.snapshot_stride < 0) throw ConfigError("edit.snapshot_stride: must be >= 0");

  std::map<std::string, std::string> akv;
  for (const auto& [k, v] : kv) {
    if (k.rfind("alignment.", 0) == 0) akv[k.substr(10)] = v;
  }
  c.alignment = wrap_invalid("alignment", [&] { return AlignmentConfig::from_kv(akv); });
  if (!akv.count("K")) c.alignment.K = c.T / 5;

  if (auto v = get("sweep.modes")) {
    for (const auto& m : split_list(*v)) {
      c.sweep_modes.push_back(wrap_invalid("sweep.modes", [&] { return parse_alignment_mode(m); }));
    }
  } else {
    c.sweep_modes = {c.alignment.mode};
  }
  if (auto v = get("sweep.K")) {
    for (const auto& k : split_list(*v)) c.sweep_K.push_back(parse_integer<int>("sweep.K", k));
  } else {
    c.sweep_K = {c.alignment.K};
  }
  if (auto v = get("sweep.beta")) {
    for (const auto& b : split_list(*v)) c.sweep_beta.push_back(parse_real("sweep.beta", b));
  } else {
    c.sweep_beta = {c.alignment.beta.value};
  }
  if (auto v = get("sweep.seeds")) {
    for (const auto& s : split_list(*v)) append_seeds("sweep.seeds", s, c.seeds);
  } else {
    c.seeds = {c.seed};
  }
  if (auto v = get("baseline.t_inject")) {
    for (const auto& t : split_list(*v)) c.t_inject.push_back(parse_integer<int>("baseline.t_inject", t));
  }
  if (c.sweep_modes.empty() || c.sweep_K.empty() || c.sweep_beta.empty() || c.seeds.empty()) {
    throw ConfigError("sweep: every sweep list needs at least one entry");
  }
  for (double b : c.sweep_beta) {
    if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("sweep.beta: values must lie in [0, 1]");
  }

  if (auto v = get("metrics.dynamic_range")) {
    c.dynamic_range = parse_real("metrics.dynamic_range", *v);
    if (!(*c.dynamic_range > 0.0)) throw ConfigError("metrics.dynamic_range: must be positive");
  }
  if (auto v = get("check.tolerance")) c.check_tolerance = parse_real("check.tolerance", *v);
  if (!(c.check_tolerance >= 0.0)) throw ConfigError("check.tolerance: must be >= 0");
  if (auto v = get("check.seeds")) c.check_seeds = parse_integer<int>("check.seeds", *v);
  if (c.check_seeds < 1) throw ConfigError("check.seeds: must be >= 1");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, const std::map<std::string, std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path().empty() ? "." : path.parent_path(), overrides, path.string());
}

}  // namespace spalign
