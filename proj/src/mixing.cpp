#include "spalign/mixing.hpp"

#include <stdexcept>
#include <vector>

#include "spalign/error.hpp"
#include "spalign/grid_io.hpp"
#include "spalign/kernels.hpp"

namespace spalign {

MixMask::MixMask(LatentGrid values) : values_(std::move(values)) {
  for (double v : values_.values()) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("mask value outside [0,1]");
  }
}

MixMask MixMask::constant(const Shape& shape, double value) { return MixMask(LatentGrid::filled(shape, value)); }

LatentGrid mix_latents(const LatentGrid& x_aligned, const LatentGrid& x_free, const MixMask& mask, int t, int K) {
  require_same_shape(x_aligned, x_free, "mix_latents");
  if (!mask.compatible_with(x_free.shape())) {
    throw std::invalid_argument("mix_latents: mask shape " + mask.shape().to_string() +
                                " does not fit latent " + x_free.shape().to_string());
  }
  if (t <= K) return x_free;
  std::vector<double> out(x_free.size());
  kernels::parallel::masked_blend(x_aligned.values(), x_free.values(), mask.values().values(), out);
  return LatentGrid(x_free.shape(), std::move(out));
}

MixMask load_mask(const std::filesystem::path& path, const Shape& shape) {
  const auto img = io::read_pgm(path);
  if (shape.empty()) throw std::invalid_argument("load_mask: empty latent shape");
  const std::size_t r = shape.rank();
  const std::size_t h = r == 1 ? 1 : shape[r - 2];
  const std::size_t w = shape[r - 1];
  const Shape mask_shape = r == 1 ? Shape{w} : Shape{h, w};
  if (img.width != w || img.height != h) {
    throw ModelError(path.string() + ": mask is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                     ", latent needs " + std::to_string(w) + "x" + std::to_string(h));
  }
  std::vector<double> v(img.samples.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(img.samples[i]) / img.maxval;
  return MixMask(LatentGrid(mask_shape, std::move(v)));
}

}  // namespace spalign
