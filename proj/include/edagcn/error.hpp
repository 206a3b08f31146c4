#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace edagcn {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values met during a numeric procedure.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace edagcn
