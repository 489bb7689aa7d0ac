#pragma once

#include <filesystem>

#include "spalign/grid.hpp"

namespace spalign {

/// Soft mask in [0, 1]. Its shape equals the latent shape or a trailing
/// part of it ([H,W] for a [C,H,W] latent), and it broadcasts over the
/// remaining leading axes.
class MixMask {
 public:
  explicit MixMask(LatentGrid values);

  static MixMask constant(const Shape& shape, double value);

  const LatentGrid& values() const noexcept { return values_; }
  const Shape& shape() const noexcept { return values_.shape(); }
  bool compatible_with(const Shape& latent) const noexcept { return latent.has_suffix(shape()); }

 private:
  LatentGrid values_;
};

/// Mask-weighted blend of the aligned and free latents for t > K:
///   x_aligned * M + x_free * (1 - M)
/// For t <= K the free latent passes through unchanged.
LatentGrid mix_latents(const LatentGrid& x_aligned, const LatentGrid& x_free, const MixMask& mask, int t, int K);

/// PGM mask (8- or 16-bit), pixel / maxval. `shape` is the latent shape; the
/// image must match its trailing two extents.
MixMask load_mask(const std::filesystem::path& path, const Shape& shape);

}  // namespace spalign
