#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace spalign {

/// Extents of a latent, outermost first ([C,H,W] or [D]).
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::size_t> extents);
  explicit Shape(std::vector<std::size_t> extents);

  std::size_t rank() const noexcept { return extents_.size(); }
  std::size_t operator[](std::size_t axis) const { return extents_.at(axis); }
  const std::vector<std::size_t>& extents() const noexcept { return extents_; }
  bool empty() const noexcept { return extents_.empty(); }

  /// Product of extents; 0 for an empty shape.
  std::size_t element_count() const noexcept;

  /// The trailing two extents for images ([H,W] out of [1,H,W] or [H,W]).
  /// Throws if the shape has no 2-D interpretation.
  std::pair<std::size_t, std::size_t> image_extents() const;

  /// True when `suffix` equals the trailing extents of this shape.
  bool has_suffix(const Shape& suffix) const noexcept;

  std::string to_string() const;  // "1x4x4"
  static Shape parse(const std::string& text);

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  std::vector<std::size_t> extents_;
};

/// Dense row-major array of doubles. Immutable once built; every value is
/// finite and the element count matches the shape.
class LatentGrid {
 public:
  LatentGrid() = default;
  LatentGrid(Shape shape, std::vector<double> values);

  static LatentGrid filled(const Shape& shape, double value);
  static LatentGrid zeros(const Shape& shape) { return filled(shape, 0.0); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Bitwise-identical contents and shape.
  bool bit_equal(const LatentGrid& other) const noexcept;

  friend bool operator==(const LatentGrid& a, const LatentGrid& b) {
    return a.shape_ == b.shape_ && a.values_ == b.values_;
  }

 private:
  Shape shape_;
  std::vector<double> values_;
};

void require_same_shape(const LatentGrid& a, const LatentGrid& b, const char* op);

/// Largest absolute elementwise difference.
double max_abs_diff(const LatentGrid& a, const LatentGrid& b);

}  // namespace spalign
