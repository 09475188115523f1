#pragma once

#include <stdexcept>
#include <string>

namespace paramp {

/// A value violated a documented precondition or type invariant.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A series is too short for the requested measurement.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An envelope shows no usable periodic modulation.
class NotPeriodic : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A regression input is degenerate (e.g. log of a zero envelope).
class DegenerateFit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pump depth at or past the parametric threshold: the linear steady state
/// does not exist, so closed-form gains are undefined.
class AboveThreshold : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Root bracketing failed: no sign change inside the search interval.
class NoThresholdFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axial compression made the effective stiffness indefinite.
class BeyondBuckling : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace paramp
