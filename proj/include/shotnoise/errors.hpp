#pragma once

#include <stdexcept>
#include <string>

namespace shotnoise {

// Invalid configuration or violated precondition. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Iterative solver failed; carries the last residual. CLI exit code 3.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual(residual), iterations(iterations) {}
  double residual;
  int iterations;
};

// File or stream problem. CLI exit code 4.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Fock-space truncation leaked population above the diagnostic threshold;
// rerun with a larger n_fock.
class TruncationError : public ConfigError {
 public:
  TruncationError(const std::string& what, double leak)
      : ConfigError(what), leak(leak) {}
  double leak;
};

}  // namespace shotnoise
