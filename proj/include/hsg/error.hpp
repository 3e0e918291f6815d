#pragma once

#include <stdexcept>
#include <string>

namespace hsg {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vectors of incompatible length were combined.
class DimensionError : public Error {
 public:
  DimensionError(std::size_t lhs, std::size_t rhs, const std::string& where)
      : Error(where + ": dimension mismatch (" + std::to_string(lhs) + " vs " +
              std::to_string(rhs) + ")"),
        lhs_(lhs),
        rhs_(rhs) {}

  std::size_t lhs() const { return lhs_; }
  std::size_t rhs() const { return rhs_; }

 private:
  std::size_t lhs_;
  std::size_t rhs_;
};

// An input violates a documented precondition (e.g. point off the hyperboloid).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// The operation is undefined at this input (e.g. cone at the root).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid user-supplied configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or incompatible serialized artifact.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace hsg
