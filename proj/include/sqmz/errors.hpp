#pragma once

#include <stdexcept>
#include <string>

namespace sqmz {

/// Invalid argument to a library call (bad channel index, eta outside (0, 1], ...).
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numeric result could not be produced (non-positive determinant, non-finite value).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Error propagation evaluated where the probability derivative vanishes.
class SingularityError : public NumericError {
 public:
  explicit SingularityError(const std::string& what) : NumericError(what) {}
};

/// A closed-form expression was asked for outside its domain (e.g. arcsin of a value > 1).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace sqmz
