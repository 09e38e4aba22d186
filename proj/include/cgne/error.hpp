#pragma once

#include <stdexcept>
#include <string>

namespace cgne {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Overlapping symmetric copies of a wedge disagree during reconstruction.
class SymmetryViolation : public Error {
 public:
  using Error::Error;
};

/// Input outside an operation's documented domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A simulation finished without growing past the seed.
class DegenerateRun : public Error {
 public:
  using Error::Error;
};

/// Trajectory file is not in the expected format (magic, version, layout).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Trajectory file ends before its declared content.
class TruncationError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Data parses but breaks a trajectory invariant (monotonicity, seed frame).
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// The exact transport solver failed to reach an optimum.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// A rho bin holds fewer samples than the configured minimum.
class UnderpopulatedBin : public Error {
 public:
  using Error::Error;
};

}  // namespace cgne
