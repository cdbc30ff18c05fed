#pragma once

#include <stdexcept>
#include <string>

namespace pfedsop {

/// Base for every error raised by the library. Callers that only care about
/// "something went wrong" catch this; the subclasses name the failure class.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched vector or matrix extents.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A scalar hyperparameter or function argument outside its legal range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Invalid or insufficient data (NaN inputs, empty sets, too few samples).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed CSV input. The message names the offending line.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Violation of the federated round protocol (empty aggregation, etc.).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// A precondition that the caller was responsible for was not met.
class ContractError : public Error {
 public:
  using Error::Error;
};

class InfeasiblePartitionError : public Error {
 public:
  using Error::Error;
};

/// Configuration problem; `key()` is the offending dotted key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace pfedsop
