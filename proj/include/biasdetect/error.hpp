#pragma once

#include <stdexcept>
#include <string>

namespace biasdetect {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when more than half the records of an input file cannot be mapped.
class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

/// Raised by correlation routines when a column has zero variance.
class UndefinedCorrelation : public Error {
 public:
  using Error::Error;
};

}  // namespace biasdetect
