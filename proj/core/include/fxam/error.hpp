#pragma once

#include <stdexcept>
#include <string>

namespace fxam {

/// Malformed or inconsistent input data (bad columns, parse failures, schema mismatch).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid hyperparameter or argument combination.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative procedure failed to reach its tolerance or produced non-finite values.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense O(N^2) helpers refuse inputs above their size bound.
class TestSupportError : public std::length_error {
 public:
  explicit TestSupportError(const std::string& what)
      : std::length_error("test-support only: " + what) {}
};

}  // namespace fxam
