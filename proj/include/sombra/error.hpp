#pragma once

#include <stdexcept>
#include <string>

namespace sombra {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  /// Short machine-readable category, used by the CLI error line.
  virtual const char* kind() const noexcept { return "error"; }
};

class ArgumentError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "argument"; }
};

class OutOfRangeError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "out_of_range"; }
};

class CapacityError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "capacity"; }
};

class IoError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

/// Raised when decoding SBM1/SOMC/LibSVM/XML input. `reason()` tells the
/// failure classes apart so callers can react without string matching.
class ParseError : public Error {
public:
  enum class Reason { bad_magic, unsupported_version, truncated, invariant, malformed };

  ParseError(Reason reason, const std::string& what) : Error(what), reason_(reason) {}

  Reason reason() const noexcept { return reason_; }
  const char* kind() const noexcept override { return "parse"; }

private:
  Reason reason_;
};

}  // namespace sombra
