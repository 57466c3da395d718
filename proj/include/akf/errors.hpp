#pragma once

#include <stdexcept>
#include <string>

namespace akf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Out-of-range numeric argument (negative tau, q < 1, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Two operands live on incompatible grids.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A field that must be nonnegative (or nonpositive) has a value beyond the
/// round-off clamp.
class SignError : public Error {
 public:
  using Error::Error;
};

/// Non-finite data; the message carries the offending flat index.
class FiniteError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent schedule, track length, time alignment or scenario content.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A velocity profile that the lattice cannot resolve.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// An oracle that failed to produce a trustworthy reference.
class OracleFailure : public Error {
 public:
  using Error::Error;
};

/// Configuration text that could not be parsed; carries the line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace akf
