#pragma once

#include <stdexcept>
#include <string>

namespace signms {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-facing configuration (mesh sizes, parameters, config keys).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Element, node or dof index outside its valid range.
class IndexError : public Error {
public:
  using Error::Error;
};

/// Malformed grid or config file; the message carries the offending line.
class IngestError : public Error {
public:
  IngestError(const std::string& path, int line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  int line() const noexcept { return line_; }

private:
  int line_;
};

/// Factorization or solve failed (singular system, residual too large).
class SolverError : public Error {
public:
  using Error::Error;
};

/// Eigensolver or other dense numerical kernel failed.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// A quantity is undefined for the given input (e.g. zero reference norm).
class DomainError : public Error {
public:
  using Error::Error;
};

}  // namespace signms
