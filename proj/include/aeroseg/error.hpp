#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aeroseg {

/// Base class for every error the library reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based; 0 when the error is not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + (line ? ":" + std::to_string(line) : std::string{}) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Data that parsed fine but violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A forward pass produced NaN/Inf. `layer()` names the stage that failed.
class NonFiniteError : public Error {
 public:
  NonFiniteError(int layer, const std::string& stage)
      : Error("non-finite activation at layer " + std::to_string(layer) + " (" + stage + ")"),
        layer_(layer) {}

  int layer() const noexcept { return layer_; }

 private:
  int layer_;
};

}  // namespace aeroseg
