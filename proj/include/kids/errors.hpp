#pragma once

#include <stdexcept>
#include <string>

namespace kids {

// Base for every error raised by the library. The CLI maps the concrete type
// onto its exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid arguments, configuration values or violated preconditions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input files.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Non-positive-definite scales, underflowed posteriors, degenerate statistics.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// File system failures. The message always carries the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kids
