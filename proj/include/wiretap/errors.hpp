#pragma once

#include <stdexcept>
#include <string>

namespace wiretap {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct NotSymmetric : Error {
  using Error::Error;
};

struct NotPositiveSemidefinite : Error {
  using Error::Error;
};

struct SingularMatrix : Error {
  using Error::Error;
};

/// A noise covariance failed the strict positive-definiteness requirement.
struct NonPositiveDefiniteNoise : Error {
  using Error::Error;
};

/// The perturbed gain matrix could not be inverted reliably; alpha is too
/// small for the conditioning of the channel.
struct SingularPerturbedGain : Error {
  using Error::Error;
};

/// K does not satisfy 0 <= K <= S in the Loewner order.
struct OrderViolation : Error {
  using Error::Error;
};

struct PowerExceeded : Error {
  using Error::Error;
};

struct InvalidTriple : Error {
  using Error::Error;
};

/// The requested common rate exceeds min{C_Y(S), C_Z(S)}.
struct InfeasibleR0 : Error {
  using Error::Error;
};

/// An enhanced covariance came out non-positive; slack/scale inputs are
/// inconsistent with the construction.
struct NonPositiveResult : Error {
  using Error::Error;
};

/// Preconditions of an inequality check failed; the inequality is not
/// asserted.
struct HypothesisViolated : Error {
  using Error::Error;
};

struct DimensionTooLarge : Error {
  using Error::Error;
};

}  // namespace wiretap
