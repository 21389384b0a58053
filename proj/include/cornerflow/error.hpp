#pragma once

#include <stdexcept>
#include <string>

namespace cornerflow {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad parameters, malformed files, violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not deliver its contract (singular matrix,
/// unreachable tolerance, root not bracketed, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cornerflow
