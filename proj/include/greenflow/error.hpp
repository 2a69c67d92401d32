#pragma once

#include <stdexcept>
#include <string>

namespace greenflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters, malformed tables, bad config files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A nonempty zone that receives no throughput (zero power or a zero rate).
class StarvedZoneError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// State space larger than the configured ceiling.
class CapacityError : public Error {
 public:
  using Error::Error;
};

}  // namespace greenflow
