#pragma once

#include <stdexcept>
#include <string>

namespace aston {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad user-supplied configuration: unknown column, invalid flag value, ...
struct ConfigError : Error {
  using Error::Error;
};

/// Malformed input data. Carries the 1-based line number when known.
struct ParseError : Error {
  explicit ParseError(const std::string& msg, long line = -1)
      : Error(line >= 0 ? "line " + std::to_string(line) + ": " + msg : msg),
        line_number(line) {}
  long line_number;
};

/// Violated data contract at runtime (empty log, diverged training, ...).
struct DataError : Error {
  using Error::Error;
};

/// Tensor shape or index mismatch.
struct ShapeError : Error {
  using Error::Error;
};

/// Unreadable, truncated or incompatible checkpoint file.
struct CheckpointError : Error {
  using Error::Error;
};

}  // namespace aston
