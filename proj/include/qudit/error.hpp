#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace qudit {

/// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSpinError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation (t <= 0, negative threshold, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Input object violates a documented invariant (non-Hermitian matrix, bad grid, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Interpolation or lookup outside the tabulated range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Configuration error; the message starts with the offending key path.
class ConfigError : public Error {
 public:
  ConfigError(std::string key_path, const std::string& what)
      : Error(key_path + ": " + what), key_path_(std::move(key_path)) {}

  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

/// Data file or directory that does not exist or holds nothing to read.
class MissingDataError : public Error {
 public:
  using Error::Error;
};

/// Malformed data file. `line` is the 1-based line number, 0 if not line-specific.
class DataError : public Error {
 public:
  DataError(std::string path, int line, const std::string& what)
      : Error(path + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const noexcept { return path_; }
  int line() const noexcept { return line_; }

 private:
  std::string path_;
  int line_;
};

}  // namespace qudit
