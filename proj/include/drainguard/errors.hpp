#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace drainguard {

// A parameter lies outside its admissible range; field() names it.
class RangeError : public std::invalid_argument {
 public:
  RangeError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class DensityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConsistencyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotDrainable : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NoConvergence : public std::runtime_error {
 public:
  NoConvergence(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// A persisted table or value file was built for a different instance.
class StaleFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace drainguard
