#pragma once

#include <stdexcept>
#include <string>

namespace tfd {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operator/state used with an incompatible mode layout.
class LayoutError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain (negative temperature, κt < 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Density matrix is not diagonal-geometric, so no temperature can be read off.
class NotChaoticError : public Error {
 public:
  using Error::Error;
};

/// Fixed-step integration drifted out of its trace budget.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// The Fock cutoff is too small for the requested state.
class TruncationError : public Error {
 public:
  using Error::Error;
};

}  // namespace tfd
