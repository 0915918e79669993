#pragma once

#include <stdexcept>
#include <string>

namespace crn {

/// Malformed network, config file, or inconsistent settings. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or unusable data (datasets, reports). CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: degenerate cones, zero normalizer, all restarts rejected.
/// CLI exit code 4.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace crn
