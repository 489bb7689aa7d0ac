#include "spalign/schedule.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "spalign/error.hpp"
#include "spalign/grid_io.hpp"

namespace spalign {

std::string to_string(ScheduleKind kind) {
  return kind == ScheduleKind::LinearBeta ? "linear-beta" : "cosine";
}

ScheduleKind parse_schedule_kind(const std::string& text) {
  if (text == "linear-beta") return ScheduleKind::LinearBeta;
  if (text == "cosine") return ScheduleKind::Cosine;
  throw std::invalid_argument("unknown schedule kind '" + text + "'");
}

std::vector<std::string> schedule_problems(std::span<const double> alpha_bar) {
  std::vector<std::string> problems;
  if (alpha_bar.size() < 2) {
    problems.emplace_back("alpha_bar needs at least t = 0 and t = 1");
    return problems;
  }
  if (alpha_bar[0] != 1.0) problems.emplace_back("alpha_bar[0] must be exactly 1");
  for (std::size_t t = 0; t < alpha_bar.size(); ++t) {
    const double a = alpha_bar[t];
    if (!(a > 0.0 && a <= 1.0)) {
      problems.push_back("alpha_bar[" + std::to_string(t) + "] = " + io::format_double(a) + " outside (0,1]");
    }
    if (t > 0 && !(a < alpha_bar[t - 1])) {
      problems.push_back("alpha_bar not strictly decreasing at t = " + std::to_string(t));
    }
  }
  return problems;
}

NoiseSchedule::NoiseSchedule(std::vector<double> alpha_bar, std::vector<int> step_indices)
    : alpha_bar_(std::move(alpha_bar)), steps_(std::move(step_indices)) {
  const auto problems = schedule_problems(alpha_bar_);
  if (!problems.empty()) throw std::invalid_argument("noise schedule: " + problems.front());
  if (steps_.size() < 2 || steps_.back() != 0 || steps_.front() > T()) {
    throw std::invalid_argument("noise schedule: step indices must start within [0,T] and end at 0");
  }
  for (std::size_t i = 1; i < steps_.size(); ++i) {
    if (!(steps_[i] < steps_[i - 1])) throw std::invalid_argument("noise schedule: step indices not strictly decreasing");
  }
}

double NoiseSchedule::beta(int t) const {
  if (t < 1 || t > T()) throw std::out_of_range("beta: t outside [1,T]");
  return 1.0 - alpha_bar(t) / alpha_bar(t - 1);
}

NoiseSchedule NoiseSchedule::with_steps(int steps) const {
  return NoiseSchedule(alpha_bar_, uniform_step_indices(T(), steps));
}

int NoiseSchedule::step_position(int t) const noexcept {
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    if (steps_[i] == t) return static_cast<int>(i);
  }
  return -1;
}

std::vector<int> uniform_step_indices(int T, int steps) {
  if (T <= 0) throw std::invalid_argument("schedule: T must be positive");
  if (steps < 1 || steps > T) throw std::invalid_argument("schedule: steps must be in [1, T]");
  const long long n = std::max(steps, 2);
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (long long k = 0; k < n; ++k) {
    const long long num = 2LL * T * (n - 1 - k) + (n - 1);
    idx[static_cast<std::size_t>(k)] = static_cast<int>(num / (2 * (n - 1)));
  }
  return idx;
}

NoiseSchedule build_schedule(int T, ScheduleKind kind, int steps, const ScheduleParams& params) {
  auto idx = uniform_step_indices(T, steps);
  std::vector<double> ab(static_cast<std::size_t>(T) + 1);
  ab[0] = 1.0;
  if (kind == ScheduleKind::LinearBeta) {
    if (!(params.beta_start > 0.0 && params.beta_end < 1.0 && params.beta_start <= params.beta_end)) {
      throw std::invalid_argument("linear-beta endpoints must satisfy 0 < start <= end < 1");
    }
    for (int t = 1; t <= T; ++t) {
      const double frac = T == 1 ? 0.0 : static_cast<double>(t - 1) / (T - 1);
      const double beta = params.beta_start + (params.beta_end - params.beta_start) * frac;
      ab[static_cast<std::size_t>(t)] = ab[static_cast<std::size_t>(t) - 1] * (1.0 - beta);
    }
  } else {
    const double s = params.cosine_offset;
    auto f = [&](int t) {
      const double c = std::cos((static_cast<double>(t) / T + s) / (1.0 + s) * std::numbers::pi / 2.0);
      return c * c;
    };
    for (int t = 1; t <= T; ++t) {
      const double beta = std::min(1.0 - f(t) / f(t - 1), params.cosine_max_beta);
      ab[static_cast<std::size_t>(t)] = ab[static_cast<std::size_t>(t) - 1] * (1.0 - beta);
    }
  }
  return NoiseSchedule(std::move(ab), std::move(idx));
}

void write_schedule_csv(std::ostream& out, const NoiseSchedule& schedule, const std::string& config_hash) {
  out << "# spalign-schedule v1 T=" << schedule.T();
  if (!config_hash.empty()) out << " config_hash=" << config_hash;
  out << "\nt,alpha_bar\n";
  for (int t = 0; t <= schedule.T(); ++t) out << t << ',' << io::format_double(schedule.alpha_bar(t)) << '\n';
}

std::vector<double> read_alpha_bar_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schedule file " + path.string());
  const std::string name = path.string();
  std::string line;
  std::size_t lineno = 0;
  std::vector<double> ab;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "t,alpha_bar") throw ParseError(name, lineno, "expected header 't,alpha_bar'");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(name, lineno, "expected 't,alpha_bar'");
    try {
      const double t = io::parse_double(line.substr(0, comma));
      if (t != static_cast<double>(ab.size())) throw ParseError(name, lineno, "timesteps must run 0,1,2,...");
      ab.push_back(io::parse_double(line.substr(comma + 1)));
    } catch (const std::invalid_argument& e) {
      throw ParseError(name, lineno, e.what());
    }
  }
  if (!header_seen) throw ParseError(name, lineno, "no 't,alpha_bar' header");
  return ab;
}

NoiseSchedule read_schedule_csv(const std::filesystem::path& path, int steps) {
  auto ab = read_alpha_bar_csv(path);
  const auto problems = schedule_problems(ab);
  if (!problems.empty()) throw ModelError(path.string() + ": " + problems.front());
  const int T = static_cast<int>(ab.size()) - 1;
  return NoiseSchedule(std::move(ab), uniform_step_indices(T, steps));
}

}  // namespace spalign
