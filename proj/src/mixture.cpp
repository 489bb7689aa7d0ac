#include "spalign/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "spalign/error.hpp"
#include "spalign/grid_io.hpp"
#include "spalign/latent_ops.hpp"
#include "spalign/rng.hpp"

namespace spalign {

namespace {
constexpr double kWeightTolerance = 1e-12;
}

MixtureSpec::MixtureSpec(std::vector<MixtureComponent> components, std::map<int, double> class_priors)
    : components_(std::move(components)), priors_(std::move(class_priors)) {
  if (components_.empty()) throw std::invalid_argument("mixture: no components");
  shape_ = components_.front().mean.shape();
  std::map<int, double> class_weight;
  for (const auto& c : components_) {
    if (!(c.mean.shape() == shape_)) throw std::invalid_argument("mixture: component means differ in shape");
    if (!(c.weight > 0.0) || !std::isfinite(c.weight)) throw std::invalid_argument("mixture: weights must be positive");
    if (!(c.variance >= 0.0) || !std::isfinite(c.variance)) {
      throw std::invalid_argument("mixture: variances must be finite and >= 0");
    }
    if (c.class_label < 0) throw std::invalid_argument("mixture: class labels must be >= 0");
    class_weight[c.class_label] += c.weight;
  }
  for (const auto& [k, w] : class_weight) {
    if (std::abs(w - 1.0) > kWeightTolerance) {
      throw std::invalid_argument("mixture: weights of class " + std::to_string(k) + " sum to " +
                                  io::format_double(w));
    }
  }
  if (priors_.empty()) {
    for (const auto& [k, w] : class_weight) priors_[k] = 1.0 / static_cast<double>(class_weight.size());
  }
  double total = 0.0;
  for (const auto& [k, p] : priors_) {
    if (!class_weight.count(k)) throw std::invalid_argument("mixture: class " + std::to_string(k) + " has no component");
    if (!(p > 0.0)) throw std::invalid_argument("mixture: class priors must be positive");
    total += p;
  }
  for (const auto& [k, w] : class_weight) {
    if (!priors_.count(k)) throw std::invalid_argument("mixture: class " + std::to_string(k) + " has no prior");
  }
  if (std::abs(total - 1.0) > kWeightTolerance) throw std::invalid_argument("mixture: class priors must sum to 1");
  for (const auto& [k, p] : priors_) classes_.push_back(k);
  packed_means_.reserve(components_.size() * dim());
  for (const auto& c : components_) packed_means_.insert(packed_means_.end(), c.mean.values().begin(), c.mean.values().end());
}

double MixtureSpec::global_weight(std::size_t i) const {
  const auto& c = components_[i];
  return priors_.at(c.class_label) * c.weight;
}

double MixtureSpec::mean_spread() const noexcept {
  const auto [lo, hi] = std::minmax_element(packed_means_.begin(), packed_means_.end());
  const double spread = *hi - *lo;
  return spread > 0.0 ? spread : 1.0;
}

namespace {

struct RawComponent {
  std::optional<int> cls;
  std::optional<double> weight;
  std::optional<double> variance;
  std::optional<std::vector<double>> mean;
  std::optional<std::filesystem::path> mean_image;
  std::size_t line = 0;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int parse_index(const std::string& s) {
  std::size_t pos = 0;
  const int v = std::stoi(s, &pos);
  if (pos != s.size() || v < 0) throw std::invalid_argument("bad index '" + s + "'");
  return v;
}

}  // namespace

MixtureSpec read_mixture_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mixture file " + path.string());
  const std::string name = path.string();
  std::optional<Shape> shape;
  std::map<int, double> priors;
  std::map<int, RawComponent> raw;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(name, lineno, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "shape") {
        shape = Shape::parse(value);
        continue;
      }
      std::vector<std::string> parts;
      std::istringstream ks(key);
      std::string part;
      while (std::getline(ks, part, '.')) parts.push_back(part);
      if (parts.size() == 3 && parts[0] == "class" && parts[2] == "prior") {
        priors[parse_index(parts[1])] = io::parse_double(value);
      } else if (parts.size() == 3 && parts[0] == "component") {
        auto& c = raw[parse_index(parts[1])];
        c.line = lineno;
        const std::string& field = parts[2];
        if (field == "class") {
          c.cls = parse_index(value);
        } else if (field == "weight") {
          c.weight = io::parse_double(value);
        } else if (field == "variance") {
          c.variance = io::parse_double(value);
        } else if (field == "mean") {
          std::vector<double> v;
          std::string cell;
          std::string normalized = value;
          std::replace(normalized.begin(), normalized.end(), ',', ' ');
          std::istringstream vs(normalized);
          while (vs >> cell) v.push_back(io::parse_double(cell));
          c.mean = std::move(v);
        } else if (field == "mean_image") {
          c.mean_image = path.parent_path() / value;
        } else {
          throw std::invalid_argument("unknown key '" + key + "'");
        }
      } else {
        throw std::invalid_argument("unknown key '" + key + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(name, lineno, e.what());
    }
  }
  if (!shape) throw ParseError(name, lineno, "missing 'shape'");
  if (raw.empty()) throw ParseError(name, lineno, "no components");
  std::map<int, int> class_sizes;
  for (const auto& [i, c] : raw) {
    if (!c.cls) throw ParseError(name, c.line, "component " + std::to_string(i) + " has no class");
    ++class_sizes[*c.cls];
  }
  std::vector<MixtureComponent> comps;
  int expected = 0;
  for (auto& [i, c] : raw) {
    if (i != expected++) throw ParseError(name, c.line, "component indices must run 0..n-1");
    if (!c.variance) throw ParseError(name, c.line, "component " + std::to_string(i) + " has no variance");
    if (!c.weight && class_sizes[*c.cls] != 1) {
      throw ParseError(name, c.line, "component " + std::to_string(i) + " needs a weight");
    }
    if (c.mean.has_value() == c.mean_image.has_value()) {
      throw ParseError(name, c.line, "component " + std::to_string(i) + " needs exactly one of mean / mean_image");
    }
    try {
      LatentGrid mean = c.mean ? LatentGrid(*shape, std::move(*c.mean)) : io::read_grid(*c.mean_image, *shape);
      comps.push_back({c.weight.value_or(1.0), std::move(mean), *c.variance, *c.cls});
    } catch (const std::invalid_argument& e) {
      throw ParseError(name, c.line, e.what());
    }
  }
  try {
    return MixtureSpec(std::move(comps), std::move(priors));
  } catch (const std::invalid_argument& e) {
    throw ModelError(name + ": " + e.what());
  }
}

void write_mixture_file(const std::filesystem::path& path, const MixtureSpec& spec) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "shape = " << spec.shape().to_string() << '\n';
  for (int k : spec.classes()) out << "class." << k << ".prior = " << io::format_double(spec.prior(k)) << '\n';
  const auto comps = spec.components();
  for (std::size_t i = 0; i < comps.size(); ++i) {
    out << "component." << i << ".class = " << comps[i].class_label << '\n';
    out << "component." << i << ".weight = " << io::format_double(comps[i].weight) << '\n';
    out << "component." << i << ".variance = " << io::format_double(comps[i].variance) << '\n';
    out << "component." << i << ".mean =";
    for (double v : comps[i].mean.values()) out << ' ' << io::format_double(v);
    out << '\n';
  }
}

LatentGrid sample_reference(const MixtureSpec& spec, int k, std::uint64_t seed) {
  if (k >= 0 && !spec.has_class(k)) throw std::invalid_argument("sample_reference: unknown class " + std::to_string(k));
  RngStream rng(seed, streams::kReference);
  const auto comps = spec.components();
  double total = 0.0;
  std::size_t pick = comps.size();
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (k >= 0 && comps[i].class_label != k) continue;
    total += k >= 0 ? comps[i].weight : spec.global_weight(i);
    pick = i;
  }
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (k >= 0 && comps[i].class_label != k) continue;
    acc += k >= 0 ? comps[i].weight : spec.global_weight(i);
    if (u < acc) {
      pick = i;
      break;
    }
  }
  const auto& c = comps[pick];
  return affine(1.0, c.mean, std::sqrt(c.variance), gaussian_grid(rng, spec.shape()));
}

namespace presets {

MixtureSpec line3() {
  const Shape s{1};
  return MixtureSpec({{0.3, LatentGrid(s, {-2.0}), 0.3, 0},
                      {0.5, LatentGrid(s, {0.5}), 0.1, 0},
                      {0.2, LatentGrid(s, {3.0}), 0.5, 0}});
}

MixtureSpec two_class_grid(double separation, double variance, double layout_amplitude) {
  // Background layouts over the 4x4 grid; the centre 2x2 patch is left to
  // the class.
  static constexpr int kLayouts[3][16] = {
      {1, 1, 1, 1, 1, 0, 0, 1, -1, 0, 0, -1, -1, -1, -1, -1},
      {1, 1, -1, -1, 1, 0, 0, -1, 1, 0, 0, -1, 1, 1, -1, -1},
      {-1, 1, -1, 1, 1, 0, 0, -1, -1, 0, 0, 1, 1, -1, 1, -1},
  };
  const Shape s{1, 4, 4};
  std::vector<MixtureComponent> comps;
  for (int cls = 0; cls < 2; ++cls) {
    const double patch = (cls == 0 ? -0.5 : 0.5) * separation;
    for (const auto& layout : kLayouts) {
      std::vector<double> v(16);
      for (int i = 0; i < 16; ++i) v[i] = layout[i] == 0 ? patch : layout_amplitude * layout[i];
      comps.push_back({1.0 / 3.0, LatentGrid(s, std::move(v)), variance, cls});
    }
  }
  return MixtureSpec(std::move(comps));
}

MixtureSpec two_class_line(std::size_t d, double half_gap, double variance) {
  const Shape s{d};
  return MixtureSpec({{1.0, LatentGrid::filled(s, -half_gap), variance, 0},
                      {1.0, LatentGrid::filled(s, half_gap), variance, 1}});
}

MixtureSpec two_class_patch(std::size_t side, double level, double variance) {
  if (side < 2) throw std::invalid_argument("two_class_patch: side must be >= 2");
  const Shape s{1, side, side};
  std::vector<double> m0(side * side, 0.0);
  std::vector<double> m1(side * side, 0.0);
  const std::size_t lo = side / 2 - 1;
  for (std::size_t r = lo; r < lo + 2; ++r) {
    for (std::size_t c = lo; c < lo + 2; ++c) {
      m0[r * side + c] = -level;
      m1[r * side + c] = level;
    }
  }
  return MixtureSpec({{1.0, LatentGrid(s, std::move(m0)), variance, 0}, {1.0, LatentGrid(s, std::move(m1)), variance, 1}});
}

MixtureSpec spatial_halves(double level, double variance) {
  const Shape s{1, 4, 4};
  std::vector<double> right(16, level);
  for (std::size_t i = 0; i < 16; ++i) {
    if (i % 4 >= 2) right[i] = -level;
  }
  return MixtureSpec({{1.0, LatentGrid::filled(s, level), variance, 0}, {1.0, LatentGrid(s, std::move(right)), variance, 1}});
}

std::vector<std::string> names() {
  return {"line3", "two-class-grid", "two-class-line", "two-class-patch", "spatial-halves"};
}

MixtureSpec by_name(const std::string& name) {
  if (name == "line3") return line3();
  if (name == "two-class-grid") return two_class_grid();
  if (name == "two-class-line") return two_class_line(4, 0.3, 0.25);
  if (name == "two-class-patch") return two_class_patch(8, 4.0, 4.0);
  if (name == "spatial-halves") return spatial_halves();
  throw ConfigError("unknown mixture preset '" + name + "'");
}

}  // namespace presets

}  // namespace spalign
