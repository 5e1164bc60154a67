#pragma once

#include <stdexcept>
#include <string>

namespace metamix {

// Coarse classification used for CLI exit codes (1, 2, 3).
enum class ErrorKind { usage, data, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Argument outside an operation's mathematical domain (p not in (0,1), ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

// Bad input data: malformed CSV, degenerate tables, too few studies.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

// Root not bracketed, quadrature or grid refinement failed to converge.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::numerical, what) {}
};

}  // namespace metamix
