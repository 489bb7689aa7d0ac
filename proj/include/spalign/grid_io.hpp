#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spalign/grid.hpp"

namespace spalign::io {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
/// Full-string decimal parse; throws std::invalid_argument on trailing junk.
double parse_double(const std::string& text);

// Grid CSV: one header line, then one value per line.
//
//   # spalign-grid v1 shape=1x4x4 config_hash=<16 hex digits>
//   0.25
//   ...
//
// config_hash is optional on read.
void write_grid_csv(std::ostream& out, const LatentGrid& grid, const std::string& config_hash = {});
void write_grid_csv(const std::filesystem::path& path, const LatentGrid& grid,
                    const std::string& config_hash = {});
LatentGrid read_grid_csv(const std::filesystem::path& path);

/// Binary PGM (P5) contents.
struct PgmImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::uint32_t maxval = 0;
  std::vector<std::uint16_t> samples;  // row-major, height*width
  /// Value range from a "# range <min> <max>" comment, when present.
  std::optional<std::pair<double, double>> range;
};

PgmImage read_pgm(const std::filesystem::path& path);
PgmImage parse_pgm(const std::string& bytes, const std::string& name = "<memory>");

/// 16-bit P5 with the affine value range recorded as "# range <min> <max>".
/// Values map to round((v - min) / (max - min) * 65535), clamped.
void write_grid_pgm(const std::filesystem::path& path, const LatentGrid& grid, double min, double max,
                    const std::string& config_hash = {});
/// Same, with [min, max] taken from the grid itself.
void write_grid_pgm(const std::filesystem::path& path, const LatentGrid& grid,
                    const std::string& config_hash = {});

/// Pixels mapped back through the recorded range (or [0, 1] without one).
LatentGrid pgm_to_grid(const PgmImage& img, const Shape& shape);

/// Reads a grid from .csv or .pgm by extension. `shape` is required for PGM
/// files and checked against the CSV header otherwise (when given).
LatentGrid read_grid(const std::filesystem::path& path, const std::optional<Shape>& shape = std::nullopt);

}  // namespace spalign::io
