#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "spalign/denoiser.hpp"

namespace spalign {

enum class Activation { Identity, Relu, Tanh, Silu };

std::string to_string(Activation a);
Activation parse_activation(const std::string& text);

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // row-major [out][in]
  std::vector<double> bias;     // [out]
};

struct MlpParams {
  Shape shape;                  // latent shape, D = element count
  int classes = 0;              // one-hot has classes + 1 slots, slot 0 = unconditional
  std::size_t embedding_dim = 0;  // even
  double embedding_base = 10000.0;
  Activation activation = Activation::Relu;
  std::vector<DenseLayer> layers;
};

/// Feed-forward noise predictor on [x_t, time embedding, condition one-hot].
///
/// Time embedding of integer timestep t with E = embedding_dim, h = E/2:
///   f_j = base^(-j/h),  emb = [sin(t f_0..f_{h-1}), cos(t f_0..f_{h-1})]
/// The activation is applied after every layer except the last.
class MlpDenoiser final : public EpsilonModel {
 public:
  explicit MlpDenoiser(MlpParams params);

  /// Layers [D+E+C+1 -> hidden... -> D] with every weight and bias zero.
  static MlpDenoiser zeros(const Shape& shape, int classes, std::size_t embedding_dim,
                           std::vector<std::size_t> hidden, Activation activation = Activation::Relu);

  const Shape& shape() const override { return params_.shape; }
  LatentGrid predict(const LatentGrid& x_t, NoiseLevel level, Condition cond) const override;

  const MlpParams& params() const noexcept { return params_; }
  std::size_t input_dim() const noexcept;
  std::vector<double> time_embedding(int t) const;

 private:
  MlpParams params_;
};

// Weight file grammar (ASCII, one directive per line, tokens separated by
// spaces or tabs, '#' starts a comment line):
//
//   file      := "spalign-mlp 1" NL header layer+
//   header    := "shape" uint+ NL "classes" uint NL "embedding" uint real NL
//                "activation" name NL "layers" uint uint+ NL
//   layer     := "weights" idx NL row{n_out} "bias" idx NL row
//   row       := real+ NL
//
// Layer idx counts from 1; each weight row has n_in values, the bias row
// n_out values. Reals use the shortest round-trip decimal form on output.
MlpDenoiser read_mlp(const std::filesystem::path& path);
MlpDenoiser parse_mlp(std::istream& in, const std::string& name);
void write_mlp(std::ostream& out, const MlpDenoiser& model);
void write_mlp(const std::filesystem::path& path, const MlpDenoiser& model);

}  // namespace spalign
