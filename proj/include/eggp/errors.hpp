#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace eggp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller handed us data that violates a precondition (bad shapes, empty
// inputs, out-of-range indices).
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// A config file or option set could not be parsed or is inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Model and data disagree on layout (attribute dims, node counts where a
// match is required, missing targets).
class MismatchError : public Error {
 public:
  using Error::Error;
};

// Linear algebra gave up: factorization failed after jitter escalation,
// non-finite values appeared outside training.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Optimization aborted. Carries the loss trace up to the failure point.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& msg, std::vector<double> trace)
      : Error(msg), loss_trace(std::move(trace)) {}
  std::vector<double> loss_trace;
};

}  // namespace eggp
