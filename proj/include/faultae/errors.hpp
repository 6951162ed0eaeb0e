#pragma once

#include <stdexcept>
#include <string>

namespace faultae {

/// Base for every error raised by the library. The CLI maps the concrete
/// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Input violates a documented contract: bad shapes, malformed files,
/// leakage of non-training rows, out-of-range configuration values.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed text field. Carries the 1-based line number when known.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, long line = -1)
      : ValidationError(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

/// Non-finite values, non-positive eigenvalues and other numerical breakdowns.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace faultae
