#pragma once

#include <stdexcept>
#include <string>

namespace sta {

/// Caller supplied a parameter outside the documented range (exit code 2 in the CLI).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Normalized time or another bounded argument fell outside its domain.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class InvalidHamiltonian : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A pulse recipe divides by a quantity that vanishes inside (0,1).
class SingularSchedule : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integrator drift (norm or trace) exceeded its bound; use a finer grid.
class AccuracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PositivityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sta
