#include "spalign/alignment.hpp"

#include <cmath>
#include <stdexcept>

#include "spalign/grid_io.hpp"
#include "spalign/latent_ops.hpp"

namespace spalign {

std::string to_string(AlignmentMode mode) {
  switch (mode) {
    case AlignmentMode::None: return "none";
    case AlignmentMode::Input: return "input";
    case AlignmentMode::Epsilon: return "epsilon";
    case AlignmentMode::EpsilonScaled: return "epsilon-scaled";
    case AlignmentMode::PredX0: return "pred-x0";
  }
  return "?";
}

AlignmentMode parse_alignment_mode(const std::string& text) {
  if (text == "none") return AlignmentMode::None;
  if (text == "input") return AlignmentMode::Input;
  if (text == "epsilon") return AlignmentMode::Epsilon;
  if (text == "epsilon-scaled") return AlignmentMode::EpsilonScaled;
  if (text == "pred-x0") return AlignmentMode::PredX0;
  throw std::invalid_argument("unknown alignment mode '" + text + "'");
}

AlignmentConfig AlignmentConfig::defaults(int T) {
  AlignmentConfig cfg;
  cfg.K = T / 5;
  return cfg;
}

AlignmentConfig AlignmentConfig::reconstruction(AlignmentMode mode) {
  AlignmentConfig cfg;
  cfg.mode = mode;
  cfg.K = 0;
  cfg.beta = BetaLaw::constant(1.0);
  return cfg;
}

void AlignmentConfig::validate(int T) const {
  if (K < 0 || K > T) throw std::invalid_argument("alignment: K must be in [0, T]");
  if (!(beta.value >= 0.0 && beta.value <= 1.0)) throw std::invalid_argument("alignment: beta value must be in [0, 1]");
}

std::map<std::string, std::string> AlignmentConfig::to_kv() const {
  return {{"mode", to_string(mode)},
          {"K", std::to_string(K)},
          {"beta.law", beta.kind == BetaLaw::Kind::Constant ? "constant" : "linear"},
          {"beta.value", io::format_double(beta.value)},
          {"symmetry_breaking", symmetry_breaking ? "true" : "false"}};
}

AlignmentConfig AlignmentConfig::from_kv(const std::map<std::string, std::string>& kv) {
  AlignmentConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "mode") {
      cfg.mode = parse_alignment_mode(value);
    } else if (key == "K") {
      std::size_t pos = 0;
      cfg.K = std::stoi(value, &pos);
      if (pos != value.size()) throw std::invalid_argument("alignment.K: not an integer");
    } else if (key == "beta.law") {
      if (value == "constant") {
        cfg.beta.kind = BetaLaw::Kind::Constant;
      } else if (value == "linear") {
        cfg.beta.kind = BetaLaw::Kind::Linear;
      } else {
        throw std::invalid_argument("alignment.beta.law must be constant or linear");
      }
    } else if (key == "beta.value") {
      cfg.beta.value = io::parse_double(value);
    } else if (key == "symmetry_breaking") {
      if (value != "true" && value != "false") throw std::invalid_argument("alignment.symmetry_breaking must be true or false");
      cfg.symmetry_breaking = value == "true";
    } else {
      throw std::invalid_argument("unknown alignment key '" + key + "'");
    }
  }
  return cfg;
}

double beta_at(int t, int T, const AlignmentConfig& cfg) {
  if (cfg.beta.kind == BetaLaw::Kind::Constant) return cfg.beta.value;
  return cfg.beta.value * static_cast<double>(t) / static_cast<double>(T);
}

namespace {

void require_beta(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("alignment: beta outside [0,1]");
}

}  // namespace

LatentGrid align_input(const LatentGrid& x_t, const LatentGrid& stoch_inv, int t, int K, double beta) {
  require_same_shape(x_t, stoch_inv, "align_input");
  require_beta(beta);
  if (t <= K || beta == 0.0) return x_t;
  return lerp(stoch_inv, x_t, beta);
}

LatentGrid align_epsilon(const LatentGrid& eps, const LatentGrid& x_t, const LatentGrid& reference, int t, int K,
                         double beta) {
  require_same_shape(eps, x_t, "align_epsilon");
  require_same_shape(x_t, reference, "align_epsilon");
  require_beta(beta);
  if (t <= K || beta == 0.0) return eps;
  return lerp(affine(1.0, x_t, -1.0, reference), eps, beta);
}

LatentGrid align_epsilon_scaled(const LatentGrid& eps, const LatentGrid& x_t, const LatentGrid& reference,
                                double alpha_bar, int t, int K, double beta) {
  require_same_shape(eps, x_t, "align_epsilon_scaled");
  require_same_shape(x_t, reference, "align_epsilon_scaled");
  require_beta(beta);
  if (!(alpha_bar > 0.0 && alpha_bar < 1.0)) throw std::invalid_argument("align_epsilon_scaled: alpha_bar must be in (0,1)");
  if (t <= K || beta == 0.0) return eps;
  const LatentGrid exact = unmix(x_t, std::sqrt(alpha_bar), reference, std::sqrt(1.0 - alpha_bar));
  return lerp(exact, eps, beta);
}

LatentGrid align_pred_x0(const LatentGrid& pred, const LatentGrid& reference, int t, int K, double beta) {
  require_same_shape(pred, reference, "align_pred_x0");
  require_beta(beta);
  if (t <= K || beta == 0.0) return pred;
  return lerp(reference, pred, beta);
}

}  // namespace spalign
