#pragma once

#include <stdexcept>
#include <string>

namespace spalign {

// Contract violations (bad shapes, out-of-range weights) are reported with
// std::invalid_argument. The types below carry a category that the CLI maps
// onto exit codes.

/// A configuration problem: unknown key, bad value, missing referenced file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model or data file exists but cannot be parsed or fails validation.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse failure with a location inside the offending file.
class ParseError : public ModelError {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : ModelError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A built-in self-check exceeded its tolerance.
class CheckFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested combination of sampler and alignment mode is not defined.
class UnsupportedCombination : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace spalign
