#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "spalign/grid.hpp"

namespace spalign {

struct MixtureComponent {
  double weight = 1.0;  // within its class
  LatentGrid mean;
  double variance = 0.0;  // isotropic, >= 0
  int class_label = 0;
};

/// Class-conditional isotropic Gaussian mixture.
///
/// Component weights are normalized within each class; the unconditional
/// mixture weights a component by prior(class) * weight. Priors default to
/// uniform over the classes that have components.
class MixtureSpec {
 public:
  explicit MixtureSpec(std::vector<MixtureComponent> components, std::map<int, double> class_priors = {});

  const Shape& shape() const noexcept { return shape_; }
  std::size_t dim() const noexcept { return shape_.element_count(); }
  std::span<const MixtureComponent> components() const noexcept { return components_; }
  const std::vector<int>& classes() const noexcept { return classes_; }
  bool has_class(int k) const noexcept { return priors_.count(k) != 0; }
  double prior(int k) const { return priors_.at(k); }
  /// prior(class) * weight for component i.
  double global_weight(std::size_t i) const;

  /// Component means packed row-major as [component][element].
  std::span<const double> packed_means() const noexcept { return packed_means_; }

  /// Largest minus smallest value over all component means (1 if flat).
  double mean_spread() const noexcept;

 private:
  Shape shape_;
  std::vector<MixtureComponent> components_;
  std::map<int, double> priors_;
  std::vector<int> classes_;
  std::vector<double> packed_means_;
};

/// Draws a sample of class k (or of the unconditional mixture when k < 0)
/// from stream 2 of `seed`: a uniform draw picks the component, then
/// mean + sqrt(variance) * z.
LatentGrid sample_reference(const MixtureSpec& spec, int k, std::uint64_t seed);

// Mixture file: `key = value` lines, '#' comments.
//
//   shape = 1x4x4
//   class.<k>.prior = <p>                 optional, default uniform
//   component.<i>.class = <k>
//   component.<i>.weight = <w>            default 1 for single-component classes
//   component.<i>.variance = <s2>
//   component.<i>.mean = <v0> <v1> ...    whitespace or comma separated
//   component.<i>.mean_image = <path>     PGM or grid CSV, relative to the file
//
// Component indices must run 0..n-1.
MixtureSpec read_mixture_file(const std::filesystem::path& path);
void write_mixture_file(const std::filesystem::path& path, const MixtureSpec& spec);

/// Built-in desk-scale mixtures, addressed as "preset:<name>" in configs.
namespace presets {
/// Three components on the line: means -2, 0.5, 3; variances 0.3, 0.1, 0.5;
/// weights 0.3, 0.5, 0.2 (single class).
MixtureSpec line3();
/// Two classes on a 1x4x4 grid. Every component shares a "layout" (one of
/// three background patterns); the classes differ by the sign of a 2x2
/// patch in the centre.
MixtureSpec two_class_grid(double separation = 3.0, double variance = 0.05, double layout_amplitude = 2.0);
/// Two classes, one component each, on [d]: means -m*1 and +m*1.
MixtureSpec two_class_line(std::size_t d, double half_gap, double variance);
/// Two classes, one component each, on a 1xSxS grid: zero background and a
/// centre 2x2 patch at -level (class 0) or +level (class 1).
MixtureSpec two_class_patch(std::size_t side, double level, double variance);
/// Two classes on a 1x4x4 grid: class 0 is +level everywhere, class 1 flips
/// the sign of the right half (columns 2 and 3).
MixtureSpec spatial_halves(double level = 2.0, double variance = 0.05);

MixtureSpec by_name(const std::string& name);
std::vector<std::string> names();
}  // namespace presets

}  // namespace spalign
