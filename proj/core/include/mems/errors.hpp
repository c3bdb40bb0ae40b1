#pragma once

#include <stdexcept>
#include <string>

namespace mems {

/// Raised when an operation receives inputs outside its documented domain
/// (non-finite entries, dimension mismatches, bad configuration values).
class InvalidInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a caller hands in data that violates a checked precondition
/// the caller was responsible for (e.g. a non-orthonormal basis).
class ContractViolationError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised when a numerically computed decomposition fails its own
/// consistency checks (e.g. subspace dimensions that do not sum up).
class NumericalDegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a precoder is requested over an empty useful subspace.
class EmptyUsefulSpaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mems
