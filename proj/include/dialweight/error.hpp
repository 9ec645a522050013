#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dialweight {

// Base class for every error the library raises. The CLI maps subclasses to
// exit codes (see tools/dialweight_main.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Bad user-supplied configuration or arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data that cannot be used: malformed files, schema violations,
// vocabulary mismatches, empty training sets.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public ParseError {
 public:
  using ParseError::ParseError;
};

class FingerprintMismatch : public DataError {
 public:
  using DataError::DataError;
};

// Non-finite loss or parameters during training.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace dialweight
