#pragma once

#include <stdexcept>
#include <string>

namespace cocluster {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A quantity is mathematically undefined for the given input
/// (zero-length vector, all-zero matrix, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A membership has an empty cluster, so U'U (or V'V) cannot be inverted.
class SingularError : public Error {
 public:
  using Error::Error;
};

/// Invalid fit, grid or generator parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable input (files, CSV, JSON, corpora).
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace cocluster
