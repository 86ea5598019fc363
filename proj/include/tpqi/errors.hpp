#pragma once

#include <stdexcept>
#include <string>

namespace tpqi {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A physical or numerical parameter is outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Bin grids are malformed or do not match each other.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// The requested regime is outside what the stochastic model represents.
class ModelValidityError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data (unsorted streams, truncated files, bad CSV rows).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A sampled curve does not have the shape an estimator needs.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A construction that has no unique answer (identical lines, zero-width profile).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Two Stark lines never cross.
class NoCrossingError : public Error {
 public:
  using Error::Error;
};

/// Contrast requested against a reference that vanishes in the central window.
class UndefinedContrastError : public Error {
 public:
  using Error::Error;
};

/// File system failures, always carrying the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tpqi
