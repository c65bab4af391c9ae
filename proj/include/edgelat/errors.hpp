#pragma once

#include <stdexcept>
#include <string>

namespace edgelat {

// Base of every error raised by the library. The CLI maps the three
// families (config, data, runtime) onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside its documented interval (indices, sample counts, factors).
class RangeError : public Error {
 public:
  using Error::Error;
};

// Wrong shape: missing/duplicate operator variants, empty inputs, length mismatch.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Value violates a mathematical precondition (non-positive latency, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Non-finite or otherwise unusable numeric data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed file; message carries "<path>:<line>: <field>: <reason>".
class ParseError : public DataError {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : DataError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Dangling or duplicated reference between records (unknown device, duplicate sample).
class ReferentialError : public DataError {
 public:
  using DataError::DataError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Synthetic device cannot be scaled to the requested mean latency.
class CalibrationError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace edgelat
