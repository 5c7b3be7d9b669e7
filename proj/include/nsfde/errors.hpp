#pragma once

#include <stdexcept>
#include <string>

namespace nsfde {

/// Quadrature that refuses to converge, factorizations that fail after
/// jitter, Picard runs that exhaust max_iters.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unknown scenario/config input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a scenario fails hypothesis validation and the solver is
/// asked to run anyway without force. Carries the name of the first
/// violated inequality so front ends can report it.
class HypothesisViolation : public std::runtime_error {
 public:
  HypothesisViolation(const std::string& msg, std::string inequality)
      : std::runtime_error(msg), inequality_(std::move(inequality)) {}

  const std::string& inequality() const { return inequality_; }

 private:
  std::string inequality_;
};

}  // namespace nsfde
