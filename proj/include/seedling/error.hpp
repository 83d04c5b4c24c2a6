#pragma once

#include <stdexcept>
#include <string>

namespace seedling {

// Base of every error raised by the library. The CLI maps these to exit code 1,
// except ConfigError which maps to 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Unsupported or corrupt file contents (images, checkpoints).
class FormatError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid parameter values passed to an operation.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

class DatasetError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace seedling
