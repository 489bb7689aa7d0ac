#include "spalign/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace spalign {

Shape::Shape(std::initializer_list<std::size_t> extents) : Shape(std::vector<std::size_t>(extents)) {}

Shape::Shape(std::vector<std::size_t> extents) : extents_(std::move(extents)) {
  for (auto e : extents_) {
    if (e == 0) throw std::invalid_argument("shape extents must be positive");
  }
}

std::size_t Shape::element_count() const noexcept {
  if (extents_.empty()) return 0;
  std::size_t n = 1;
  for (auto e : extents_) n *= e;
  return n;
}

std::pair<std::size_t, std::size_t> Shape::image_extents() const {
  if (rank() == 2) return {extents_[0], extents_[1]};
  if (rank() == 3 && extents_[0] == 1) return {extents_[1], extents_[2]};
  if (rank() == 1) return {1, extents_[0]};
  throw std::invalid_argument("shape " + to_string() + " has no single-channel image layout");
}

bool Shape::has_suffix(const Shape& suffix) const noexcept {
  if (suffix.rank() > rank() || suffix.empty()) return false;
  return std::equal(suffix.extents_.rbegin(), suffix.extents_.rend(), extents_.rbegin());
}

std::string Shape::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < extents_.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(extents_[i]);
  }
  return out;
}

Shape Shape::parse(const std::string& text) {
  std::vector<std::size_t> ext;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, 'x')) {
    if (token.empty()) throw std::invalid_argument("bad shape '" + text + "'");
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(token, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad shape '" + text + "'");
    }
    if (pos != token.size() || v <= 0) throw std::invalid_argument("bad shape '" + text + "'");
    ext.push_back(static_cast<std::size_t>(v));
  }
  if (ext.empty()) throw std::invalid_argument("empty shape");
  return Shape(std::move(ext));
}

LatentGrid::LatentGrid(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_.empty()) throw std::invalid_argument("latent grid needs a non-empty shape");
  if (values_.size() != shape_.element_count()) {
    throw std::invalid_argument("latent grid: " + std::to_string(values_.size()) +
                                " values for shape " + shape_.to_string());
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("latent grid: non-finite value");
  }
}

LatentGrid LatentGrid::filled(const Shape& shape, double value) {
  return LatentGrid(shape, std::vector<double>(shape.element_count(), value));
}

bool LatentGrid::bit_equal(const LatentGrid& other) const noexcept {
  return shape_ == other.shape_ && values_.size() == other.values_.size() &&
         (values_.empty() ||
          std::memcmp(values_.data(), other.values_.data(), values_.size() * sizeof(double)) == 0);
}

void require_same_shape(const LatentGrid& a, const LatentGrid& b, const char* op) {
  if (!(a.shape() == b.shape())) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape().to_string() +
                                " vs " + b.shape().to_string());
  }
}

double max_abs_diff(const LatentGrid& a, const LatentGrid& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace spalign
