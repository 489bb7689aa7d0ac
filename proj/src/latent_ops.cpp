#include "spalign/latent_ops.hpp"

#include <stdexcept>
#include <vector>

#include "spalign/kernels.hpp"

namespace spalign {

LatentGrid affine(double wa, const LatentGrid& a, double wb, const LatentGrid& b) {
  require_same_shape(a, b, "affine");
  std::vector<double> out(a.size());
  kernels::parallel::combine(wa, a.values(), wb, b.values(), out);
  return LatentGrid(a.shape(), std::move(out));
}

LatentGrid lerp(const LatentGrid& a, const LatentGrid& b, double w) {
  require_same_shape(a, b, "lerp");
  if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("lerp: weight outside [0,1]");
  return affine(w, a, 1.0 - w, b);
}

LatentGrid unmix(const LatentGrid& x, double c, const LatentGrid& e, double d) {
  require_same_shape(x, e, "unmix");
  if (d == 0.0) throw std::invalid_argument("unmix: zero divisor");
  std::vector<double> out(x.size());
  kernels::parallel::unmix(x.values(), c, e.values(), d, out);
  return LatentGrid(x.shape(), std::move(out));
}

double mean_squared_difference(const LatentGrid& a, const LatentGrid& b) {
  require_same_shape(a, b, "mean_squared_difference");
  return kernels::parallel::squared_distance(a.values(), b.values()) / static_cast<double>(a.size());
}

}  // namespace spalign
