#pragma once

#include <stdexcept>
#include <string>

namespace vesselforge {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs with disagreeing dims/spacing, or windows outside the volume.
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Arguments that violate a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Data-dependent failure: empty selections, degenerate inputs, I/O.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace vesselforge
