#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pgig {

/// Root of every exception thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A caller-supplied value outside its documented domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A network or run configuration that cannot support the request,
/// e.g. a pattern-mode backward pass on a layer without a pattern.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input (config, network file, CSV). Line is 1-based, 0 if unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Non-finite values produced or consumed by a numeric routine.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Training diverged (loss became non-finite).
class TrainingError : public NumericError {
 public:
  TrainingError(std::size_t epoch, const std::string& what)
      : NumericError("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace pgig
