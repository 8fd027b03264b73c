#pragma once

#include <stdexcept>
#include <string>

namespace pccseg {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (empty image, wrong geometry, missing class).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A numeric parameter outside its admissible range (k >= N, negative counts).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// A file or raster whose contents do not follow the expected encoding.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid optimizer / engine configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace pccseg
