#pragma once

#include <stdexcept>
#include <string>

namespace lowrank {

/// Malformed or non-finite input data (matrices, vectors, files).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A scalar parameter outside its admissible range.
class ParameterError : public std::invalid_argument {
 public:
  ParameterError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Raised when a numerical routine cannot produce a trustworthy answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The restricted-isometry hypothesis needed for the stability constants fails.
class HypothesisViolated : public std::domain_error {
 public:
  HypothesisViolated(double mu, const std::string& what)
      : std::domain_error(what), mu_(mu) {}

  double mu() const noexcept { return mu_; }

 private:
  double mu_;
};

}  // namespace lowrank
