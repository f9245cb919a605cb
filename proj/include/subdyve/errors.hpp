#pragma once

#include <stdexcept>
#include <string>

namespace subdyve {

// Process exit codes used by the CLI driver.
enum class ExitCode : int {
  ok = 0,
  config_error = 2,
  data_error = 3,
  numeric_error = 4,
};

// Bad configuration: unknown keys, out-of-range values, missing required paths.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Bad or missing input data: unreadable files, hash mismatches, malformed records.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: non-convergence, degenerate inputs, divergence.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace subdyve
