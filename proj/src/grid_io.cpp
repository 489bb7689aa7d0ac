#include "spalign/grid_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "spalign/error.hpp"

namespace spalign::io {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  std::string t = text;
  t.erase(0, t.find_first_not_of(" \t\r"));
  t.erase(t.find_last_not_of(" \t\r") + 1);
  if (t == "inf" || t == "+inf") return HUGE_VAL;
  if (t == "-inf") return -HUGE_VAL;
  const char* first = t.data();
  if (!t.empty() && t[0] == '+') ++first;
  double v = 0.0;
  auto res = std::from_chars(first, t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  return v;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_grid_csv(std::ostream& out, const LatentGrid& grid, const std::string& config_hash) {
  out << "# spalign-grid v1 shape=" << grid.shape().to_string();
  if (!config_hash.empty()) out << " config_hash=" << config_hash;
  out << '\n';
  for (double v : grid.values()) out << format_double(v) << '\n';
}

void write_grid_csv(const std::filesystem::path& path, const LatentGrid& grid,
                    const std::string& config_hash) {
  auto out = open_out(path);
  write_grid_csv(out, grid, config_hash);
}

LatentGrid read_grid_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  const std::string name = path.string();
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError(name, 1, "empty grid file");
  const std::string magic = "# spalign-grid v1 ";
  if (line.rfind(magic, 0) != 0) throw ParseError(name, 1, "missing '# spalign-grid v1' header");
  std::optional<Shape> shape;
  std::istringstream header(line.substr(magic.size()));
  std::string field;
  while (header >> field) {
    if (field.rfind("shape=", 0) == 0) {
      try {
        shape = Shape::parse(field.substr(6));
      } catch (const std::invalid_argument& e) {
        throw ParseError(name, 1, e.what());
      }
    }
  }
  if (!shape) throw ParseError(name, 1, "header has no shape=");
  std::vector<double> values;
  values.reserve(shape->element_count());
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      try {
        values.push_back(parse_double(cell));
      } catch (const std::invalid_argument& e) {
        throw ParseError(name, lineno, e.what());
      }
    }
  }
  if (values.size() != shape->element_count()) {
    throw ParseError(name, lineno, "expected " + std::to_string(shape->element_count()) +
                                       " values, found " + std::to_string(values.size()));
  }
  try {
    return LatentGrid(*shape, std::move(values));
  } catch (const std::invalid_argument& e) {
    throw ParseError(name, lineno, e.what());
  }
}

PgmImage read_pgm(const std::filesystem::path& path) { return parse_pgm(read_file(path), path.string()); }

PgmImage parse_pgm(const std::string& bytes, const std::string& name) {
  PgmImage img;
  std::size_t pos = 0;
  std::size_t line = 1;
  auto fail = [&](const std::string& what) -> ParseError { return ParseError(name, line, what); };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw fail("not a binary PGM (P5)");
  pos = 2;
  // Header tokens separated by whitespace; comments run to end of line.
  auto next_token = [&]() -> std::string {
    for (;;) {
      while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        if (bytes[pos] == '\n') ++line;
        ++pos;
      }
      if (pos < bytes.size() && bytes[pos] == '#') {
        const std::size_t end = bytes.find('\n', pos);
        const std::string comment = bytes.substr(pos + 1, end == std::string::npos ? std::string::npos : end - pos - 1);
        std::istringstream cs(comment);
        std::string key;
        double lo = 0.0, hi = 0.0;
        if (cs >> key && key == "range" && cs >> lo >> hi) img.range = std::make_pair(lo, hi);
        pos = end == std::string::npos ? bytes.size() : end;
        continue;
      }
      break;
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) throw fail("truncated PGM header");
    return bytes.substr(start, pos - start);
  };
  auto next_uint = [&](const char* what) -> std::uint64_t {
    const std::string tok = next_token();
    std::uint64_t v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
      throw fail(std::string("bad PGM ") + what + " '" + tok + "'");
    }
    return v;
  };
  img.width = next_uint("width");
  img.height = next_uint("height");
  const std::uint64_t maxval = next_uint("maxval");
  if (img.width == 0 || img.height == 0) throw fail("PGM dimensions must be positive");
  if (maxval == 0 || maxval > 65535) throw fail("PGM maxval must be in 1..65535");
  img.maxval = static_cast<std::uint32_t>(maxval);
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw fail("missing whitespace after PGM maxval");
  }
  ++pos;
  const std::size_t bps = img.maxval > 255 ? 2 : 1;
  const std::size_t count = img.width * img.height;
  if (bytes.size() - pos < count * bps) throw fail("PGM pixel data truncated");
  img.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t v = static_cast<unsigned char>(bytes[pos + i * bps]);
    if (bps == 2) v = (v << 8) | static_cast<unsigned char>(bytes[pos + i * bps + 1]);
    if (v > img.maxval) throw fail("PGM sample exceeds maxval");
    img.samples[i] = static_cast<std::uint16_t>(v);
  }
  return img;
}

void write_grid_pgm(const std::filesystem::path& path, const LatentGrid& grid, double min, double max,
                    const std::string& config_hash) {
  const auto [h, w] = grid.shape().image_extents();
  if (!(max >= min)) throw std::invalid_argument("write_grid_pgm: max < min");
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out << "P5\n# range " << format_double(min) << ' ' << format_double(max) << '\n';
  if (!config_hash.empty()) out << "# config_hash " << config_hash << '\n';
  out << w << ' ' << h << "\n65535\n";
  const double span = max - min;
  std::string data(grid.size() * 2, '\0');
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double u = span > 0.0 ? (grid[i] - min) / span : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    const auto v = static_cast<std::uint16_t>(std::lround(u * 65535.0));
    data[2 * i] = static_cast<char>(v >> 8);
    data[2 * i + 1] = static_cast<char>(v & 0xff);
  }
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

void write_grid_pgm(const std::filesystem::path& path, const LatentGrid& grid,
                    const std::string& config_hash) {
  const auto [lo, hi] = std::minmax_element(grid.values().begin(), grid.values().end());
  write_grid_pgm(path, grid, *lo, *hi, config_hash);
}

LatentGrid pgm_to_grid(const PgmImage& img, const Shape& shape) {
  const auto [h, w] = shape.image_extents();
  if (h != img.height || w != img.width) {
    throw std::invalid_argument("PGM is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                                ", expected " + std::to_string(w) + "x" + std::to_string(h));
  }
  const auto [lo, hi] = img.range.value_or(std::make_pair(0.0, 1.0));
  std::vector<double> values(img.samples.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = lo + (hi - lo) * (static_cast<double>(img.samples[i]) / img.maxval);
  }
  return LatentGrid(shape, std::move(values));
}

LatentGrid read_grid(const std::filesystem::path& path, const std::optional<Shape>& shape) {
  if (path.extension() == ".pgm") {
    if (!shape) throw ConfigError("reading " + path.string() + " needs a shape");
    try {
      return pgm_to_grid(read_pgm(path), *shape);
    } catch (const std::invalid_argument& e) {
      throw ModelError(path.string() + ": " + e.what());
    }
  }
  LatentGrid g = read_grid_csv(path);
  if (shape && !(g.shape() == *shape)) {
    throw ModelError(path.string() + ": shape " + g.shape().to_string() + ", expected " + shape->to_string());
  }
  return g;
}

}  // namespace spalign::io
