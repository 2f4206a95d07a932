#pragma once

#include <stdexcept>
#include <string>

namespace lyasim {

/// A numeric parameter is outside its allowed domain (e.g. a non-positive
/// concentration or rate constant).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The structure of an input is unusable: unordered grids, missing or
/// unknown config keys, too few data points.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A data file could not be parsed. Messages name the offending line.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An estimator cannot produce a result from the given data (uninformative
/// aliquot, degenerate rate, saturated measurement, failed bootstrap).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A least-squares fit failed to converge or hit singular normal equations.
/// Carries the iteration trace for diagnosis.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& message, std::string trace)
      : std::runtime_error(message), trace_(std::move(trace)) {}
  explicit FitError(const std::string& message) : std::runtime_error(message) {}

  const std::string& trace() const { return trace_; }

 private:
  std::string trace_;
};

}  // namespace lyasim
