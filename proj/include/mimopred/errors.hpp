// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace mimopred {

/// Base class for all library errors. Every failure mode the library can
/// raise deliberately derives from this, so callers can catch one type.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Matrix expected to be Hermitian is not (within tolerance).
class NotHermitian : public Error {
 public:
  using Error::Error;
};

/// Factorization failed because the matrix is singular to working precision.
class Singular : public Error {
 public:
  using Error::Error;
};

/// Requested result would exceed the configured element budget.
class SizeOverflow : public Error {
 public:
  using Error::Error;
};

/// Iterative eigensolver failed to converge.
class EigenFailure : public Error {
 public:
  using Error::Error;
};

/// Scenario parameters are out of range or inconsistent.
class InvalidScenario : public Error {
 public:
  using Error::Error;
};

/// Serialized payload dimensions are inconsistent with the header.
class BadShape : public Error {
 public:
  using Error::Error;
};

/// Operands have incompatible dimensions.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// A vector that must be nonzero has zero norm.
class ZeroVector : public Error {
 public:
  using Error::Error;
};

/// Calibration could not find strictly ordered statistics across classes.
class NonSeparable : public Error {
 public:
  using Error::Error;
};

/// Not enough snapshots or samples for the requested estimate.
class TooFewSamples : public Error {
 public:
  using Error::Error;
};

/// Matrix condition number exceeds the solvable limit even after regularization.
class IllConditioned : public Error {
 public:
  using Error::Error;
};

/// Autoregressive model has spectral radius >= 1 where stability is required.
class UnstableModel : public Error {
 public:
  using Error::Error;
};

/// Training loss became non-finite.
class DivergedLoss : public Error {
 public:
  using Error::Error;
};

/// Matrix that must have full column rank does not.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

/// Reference signal against which an error ratio is computed is zero.
class ZeroTruth : public Error {
 public:
  using Error::Error;
};

/// File could not be read/written, or its contents are malformed.
class IoFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace mimopred
