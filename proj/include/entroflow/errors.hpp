#pragma once

#include <stdexcept>
#include <string>

namespace entroflow {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input: config files, CLI arguments, malformed parameters.
// CLI exit code 1.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Runtime solver failure: non-convergence, NaN, out-of-domain evaluation.
// CLI exit code 2.
class SolverError : public Error {
 public:
  explicit SolverError(const std::string& msg) : Error(msg) {}
};

// A structural guarantee of the scheme was violated at run time
// (negative density, support reaching the truncated boundary, entropy
// increase under a valid time step). CLI exit code 3.
class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& msg) : Error(msg) {}
};

}  // namespace entroflow
