#pragma once

#include <stdexcept>
#include <string>

namespace hdgap {

// Base of every library error. The CLI maps each subclass onto an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or schema: bad baseline, unknown column, bad key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Problems with the data itself: parse failures, degenerate columns, I/O.
class DataError : public Error {
 public:
  using Error::Error;
};

// Solver non-convergence, singular designs and similar numerical failures.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace hdgap
