#pragma once

#include <stdexcept>
#include <string>

namespace crm {

// Parameter outside the domain of a function or distribution.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Result would overflow double precision.
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

// An iterative method stopped before reaching its tolerance. Carries the
// best value found so callers can decide whether it is good enough.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_estimate, double error_bound)
      : std::runtime_error(what), best_estimate_(best_estimate), error_bound_(error_bound) {}
  double best_estimate() const noexcept { return best_estimate_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  double best_estimate_;
  double error_bound_;
};

// No sampler/closed form is available for a (process, kernel) combination.
class UnsupportedPair : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Configuration validation failure (CLI and config files).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace crm
