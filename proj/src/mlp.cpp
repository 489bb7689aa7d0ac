#include "spalign/mlp.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "spalign/error.hpp"
#include "spalign/grid_io.hpp"

namespace spalign {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Silu: return "silu";
  }
  return "?";
}

Activation parse_activation(const std::string& text) {
  if (text == "identity") return Activation::Identity;
  if (text == "relu") return Activation::Relu;
  if (text == "tanh") return Activation::Tanh;
  if (text == "silu") return Activation::Silu;
  throw std::invalid_argument("unknown activation '" + text + "'");
}

namespace {

double activate(Activation a, double v) {
  switch (a) {
    case Activation::Identity: return v;
    case Activation::Relu: return v > 0.0 ? v : 0.0;
    case Activation::Tanh: return std::tanh(v);
    case Activation::Silu: return v / (1.0 + std::exp(-v));
  }
  return v;
}

}  // namespace

MlpDenoiser::MlpDenoiser(MlpParams params) : params_(std::move(params)) {
  auto fail = [](const std::string& what) { return ModelError("mlp validation: " + what); };
  if (params_.shape.empty()) throw fail("empty latent shape");
  if (params_.classes < 0) throw fail("negative class count");
  if (params_.embedding_dim % 2 != 0) throw fail("embedding dimension must be even");
  if (!(params_.embedding_base > 0.0)) throw fail("embedding base must be positive");
  if (params_.layers.empty()) throw fail("no layers");
  std::size_t width = input_dim();
  for (std::size_t l = 0; l < params_.layers.size(); ++l) {
    const auto& layer = params_.layers[l];
    const std::string tag = "layer " + std::to_string(l + 1);
    if (layer.in != width) {
      throw fail(tag + " expects " + std::to_string(layer.in) + " inputs, previous width is " + std::to_string(width));
    }
    if (layer.weights.size() != layer.in * layer.out) throw fail(tag + " weight matrix size mismatch");
    if (layer.bias.size() != layer.out) throw fail(tag + " bias size mismatch");
    for (double v : layer.weights) {
      if (!std::isfinite(v)) throw fail(tag + " has non-finite weights");
    }
    width = layer.out;
  }
  if (width != params_.shape.element_count()) {
    throw fail("output width " + std::to_string(width) + " does not match latent size " +
               std::to_string(params_.shape.element_count()));
  }
}

MlpDenoiser MlpDenoiser::zeros(const Shape& shape, int classes, std::size_t embedding_dim,
                               std::vector<std::size_t> hidden, Activation activation) {
  MlpParams p;
  p.shape = shape;
  p.classes = classes;
  p.embedding_dim = embedding_dim;
  p.activation = activation;
  std::size_t width = shape.element_count() + embedding_dim + static_cast<std::size_t>(classes) + 1;
  hidden.push_back(shape.element_count());
  for (std::size_t out : hidden) {
    p.layers.push_back({width, out, std::vector<double>(width * out, 0.0), std::vector<double>(out, 0.0)});
    width = out;
  }
  return MlpDenoiser(std::move(p));
}

std::size_t MlpDenoiser::input_dim() const noexcept {
  return params_.shape.element_count() + params_.embedding_dim + static_cast<std::size_t>(params_.classes) + 1;
}

std::vector<double> MlpDenoiser::time_embedding(int t) const {
  const std::size_t half = params_.embedding_dim / 2;
  std::vector<double> emb(params_.embedding_dim);
  for (std::size_t j = 0; j < half; ++j) {
    const double f = std::pow(params_.embedding_base, -static_cast<double>(j) / static_cast<double>(half));
    emb[j] = std::sin(t * f);
    emb[half + j] = std::cos(t * f);
  }
  return emb;
}

LatentGrid MlpDenoiser::predict(const LatentGrid& x_t, NoiseLevel level, Condition cond) const {
  if (!(x_t.shape() == params_.shape)) throw std::invalid_argument("mlp: latent shape mismatch");
  if (!cond.is_unconditional() && cond.label() >= params_.classes) {
    throw std::invalid_argument("mlp: unknown class " + cond.to_string());
  }
  std::vector<double> act;
  act.reserve(input_dim());
  act.insert(act.end(), x_t.values().begin(), x_t.values().end());
  const auto emb = time_embedding(level.t);
  act.insert(act.end(), emb.begin(), emb.end());
  std::vector<double> onehot(static_cast<std::size_t>(params_.classes) + 1, 0.0);
  onehot[cond.is_unconditional() ? 0 : static_cast<std::size_t>(cond.label()) + 1] = 1.0;
  act.insert(act.end(), onehot.begin(), onehot.end());

  for (std::size_t l = 0; l < params_.layers.size(); ++l) {
    const auto& layer = params_.layers[l];
    const bool last = l + 1 == params_.layers.size();
    std::vector<double> next(layer.out);
    for (std::size_t o = 0; o < layer.out; ++o) {
      double acc = layer.bias[o];
      const double* row = layer.weights.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) acc += row[i] * act[i];
      next[o] = last ? acc : activate(params_.activation, acc);
    }
    act = std::move(next);
  }
  return LatentGrid(params_.shape, std::move(act));
}

namespace {

class LineReader {
 public:
  LineReader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

  // Next non-comment, non-blank line split into tokens.
  std::vector<std::string> next(const char* expecting) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      std::istringstream ss(line);
      std::vector<std::string> tokens;
      std::string tok;
      while (ss >> tok) tokens.push_back(tok);
      return tokens;
    }
    throw error(std::string("unexpected end of file, expecting ") + expecting);
  }

  std::vector<std::string> directive(const std::string& keyword, std::size_t min_args) {
    auto tokens = next(keyword.c_str());
    if (tokens.front() != keyword) throw error("expected '" + keyword + "', found '" + tokens.front() + "'");
    if (tokens.size() - 1 < min_args) throw error("'" + keyword + "' needs at least " + std::to_string(min_args) + " values");
    return tokens;
  }

  std::vector<double> row(std::size_t count) {
    const auto tokens = next("a row of numbers");
    if (tokens.size() != count) {
      throw error("expected " + std::to_string(count) + " values, found " + std::to_string(tokens.size()));
    }
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = real(tokens[i]);
    return v;
  }

  std::size_t uint(const std::string& tok) {
    std::size_t pos = 0;
    long long v = -1;
    try {
      v = std::stoll(tok, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != tok.size() || v < 0) throw error("expected a non-negative integer, found '" + tok + "'");
    return static_cast<std::size_t>(v);
  }

  double real(const std::string& tok) {
    try {
      return io::parse_double(tok);
    } catch (const std::invalid_argument& e) {
      throw error(e.what());
    }
  }

  ParseError error(const std::string& what) const { return ParseError(name_, line_, what); }

 private:
  std::istream& in_;
  std::string name_;
  std::size_t line_ = 0;
};

}  // namespace

MlpDenoiser parse_mlp(std::istream& in, const std::string& name) {
  LineReader r(in, name);
  const auto magic = r.next("'spalign-mlp 1'");
  if (magic.size() != 2 || magic[0] != "spalign-mlp" || magic[1] != "1") throw r.error("expected 'spalign-mlp 1'");
  MlpParams p;
  {
    const auto t = r.directive("shape", 1);
    std::vector<std::size_t> ext;
    for (std::size_t i = 1; i < t.size(); ++i) ext.push_back(r.uint(t[i]));
    try {
      p.shape = Shape(ext);
    } catch (const std::invalid_argument& e) {
      throw r.error(e.what());
    }
  }
  p.classes = static_cast<int>(r.uint(r.directive("classes", 1)[1]));
  {
    const auto t = r.directive("embedding", 2);
    p.embedding_dim = r.uint(t[1]);
    p.embedding_base = r.real(t[2]);
  }
  try {
    p.activation = parse_activation(r.directive("activation", 1)[1]);
  } catch (const std::invalid_argument& e) {
    throw r.error(e.what());
  }
  const auto sizes_tok = r.directive("layers", 2);
  std::vector<std::size_t> sizes;
  for (std::size_t i = 1; i < sizes_tok.size(); ++i) sizes.push_back(r.uint(sizes_tok[i]));
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    DenseLayer layer{sizes[l - 1], sizes[l], {}, {}};
    const auto w = r.directive("weights", 1);
    if (r.uint(w[1]) != l) throw r.error("expected 'weights " + std::to_string(l) + "'");
    layer.weights.reserve(layer.in * layer.out);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const auto row = r.row(layer.in);
      layer.weights.insert(layer.weights.end(), row.begin(), row.end());
    }
    const auto b = r.directive("bias", 1);
    if (r.uint(b[1]) != l) throw r.error("expected 'bias " + std::to_string(l) + "'");
    layer.bias = r.row(layer.out);
    p.layers.push_back(std::move(layer));
  }
  return MlpDenoiser(std::move(p));
}

MlpDenoiser read_mlp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open weight file " + path.string());
  return parse_mlp(in, path.string());
}

void write_mlp(std::ostream& out, const MlpDenoiser& model) {
  const auto& p = model.params();
  out << "spalign-mlp 1\nshape";
  for (auto e : p.shape.extents()) out << ' ' << e;
  out << "\nclasses " << p.classes << "\nembedding " << p.embedding_dim << ' ' << io::format_double(p.embedding_base)
      << "\nactivation " << to_string(p.activation) << "\nlayers " << p.layers.front().in;
  for (const auto& l : p.layers) out << ' ' << l.out;
  out << '\n';
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& layer = p.layers[l];
    out << "weights " << l + 1 << '\n';
    for (std::size_t o = 0; o < layer.out; ++o) {
      for (std::size_t i = 0; i < layer.in; ++i) out << (i ? " " : "") << io::format_double(layer.weights[o * layer.in + i]);
      out << '\n';
    }
    out << "bias " << l + 1 << '\n';
    for (std::size_t o = 0; o < layer.out; ++o) out << (o ? " " : "") << io::format_double(layer.bias[o]);
    out << '\n';
  }
}

void write_mlp(const std::filesystem::path& path, const MlpDenoiser& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_mlp(out, model);
}

}  // namespace spalign
