#pragma once

#include <stdexcept>
#include <string>

namespace cavsim {

// Base for every error raised by the library. The CLI maps subclasses onto
// exit codes, so keep the hierarchy shallow.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ComparisonError : public Error {
 public:
  using Error::Error;
};

// A planned trajectory would leave the admissible speed/acceleration range.
// Carries enough context for the CLI to name the vehicle, zone and bound.
class InfeasiblePlanError : public Error {
 public:
  InfeasiblePlanError(std::string message, int vehicle, std::string zone, std::string bound)
      : Error(std::move(message)), vehicle_(vehicle), zone_(std::move(zone)), bound_(std::move(bound)) {}

  int vehicle() const noexcept { return vehicle_; }
  const std::string& zone() const noexcept { return zone_; }
  const std::string& bound() const noexcept { return bound_; }

 private:
  int vehicle_;
  std::string zone_;
  std::string bound_;
};

}  // namespace cavsim
