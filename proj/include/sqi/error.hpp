#pragma once

#include <stdexcept>
#include <string>

namespace sqi {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated by the caller (bad argument, shape mismatch).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Input is well-formed but carries no usable information
// (all-silent signal, constant feature, too few rows).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// File contents violate the expected format or schema.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Numerical failure (NaN during training, non-PSD covariance).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace sqi
