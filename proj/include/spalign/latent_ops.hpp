#pragma once

#include "spalign/grid.hpp"

namespace spalign {

/// w*a + (1-w)*b elementwise. w must lie in [0, 1].
LatentGrid lerp(const LatentGrid& a, const LatentGrid& b, double w);

/// wa*a + wb*b elementwise, no range restriction on the weights.
LatentGrid affine(double wa, const LatentGrid& a, double wb, const LatentGrid& b);

/// (x - c*e) / d elementwise; d must be non-zero.
LatentGrid unmix(const LatentGrid& x, double c, const LatentGrid& e, double d);

/// Mean squared elementwise difference.
double mean_squared_difference(const LatentGrid& a, const LatentGrid& b);

/// Maps images to latents and back. At desk scale the latent is the data, so
/// the only implementation is the identity; a learned codec slots in here.
class LatentCodec {
 public:
  virtual ~LatentCodec() = default;
  virtual LatentGrid encode(const LatentGrid& image) const = 0;
  virtual LatentGrid decode(const LatentGrid& latent) const = 0;
};

class IdentityCodec final : public LatentCodec {
 public:
  LatentGrid encode(const LatentGrid& image) const override { return image; }
  LatentGrid decode(const LatentGrid& latent) const override { return latent; }
};

}  // namespace spalign
