#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace numetric {

/// Base class for all library failures. Subclasses exist so callers (and the
/// CLI exit-code mapping) can tell input problems from numerical ones.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document. `position` is a byte offset into the text.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& msg, std::size_t position)
      : Error(msg + " (byte " + std::to_string(position) + ")"),
        position(position) {}
  std::size_t position;
};

/// Structurally valid input that violates a model invariant
/// (dimension mismatch, pole on the unit circle, unknown tag, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Requested operation is outside the supported class
/// (e.g. factor construction for a backend with no construction route).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// A quantity could not be pinned down within the refinement budget.
/// Never silently coerced to a value.
class UnresolvedError : public Error {
 public:
  using Error::Error;
};

/// A function required to be invertible in S vanishes (or nearly vanishes)
/// on the grid. `t` is set when a homotopy path leaves the invertibles.
class NotInvertibleError : public Error {
 public:
  explicit NotInvertibleError(const std::string& msg) : Error(msg) {}
  NotInvertibleError(const std::string& msg, double t)
      : Error(msg + " (at path parameter t = " + std::to_string(t) + ")"),
        t(t),
        has_t(true) {}
  double t = 0.0;
  bool has_t = false;
};

/// Raw winding sum is off an integer by more than the integrality tolerance:
/// the sampling failed even though phase steps looked small.
class NonIntegerWindingError : public Error {
 public:
  using Error::Error;
};

/// Non-commensurate almost-periodic frequencies whose truncated average
/// winding estimate has not converged within the error-bar budget.
class NonLatticeError : public Error {
 public:
  using Error::Error;
};

/// Riccati iteration failed to converge. Carries the residual history so
/// the caller can report how the iteration behaved.
class RiccatiError : public Error {
 public:
  RiccatiError(const std::string& msg, std::vector<double> history)
      : Error(msg), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

/// Factor construction or verification failed its residual gates.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

/// Two factor pairs do not describe the same plant (no unitary links them).
class NotEquivalentError : public Error {
 public:
  using Error::Error;
};

/// det(KtG) vanishes at a grid point: the closed loop is ill-posed there.
class SingularLoopError : public Error {
 public:
  using Error::Error;
};

/// A certified robustness bound failed its own post-check. The bound is
/// guaranteed analytically, so this signals a numerical inconsistency.
class CertificateError : public Error {
 public:
  using Error::Error;
};

}  // namespace numetric
