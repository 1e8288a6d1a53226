#pragma once

#include <stdexcept>
#include <string>

namespace molsps {

// Numeric values match the CLI exit statuses and the C API status codes.
enum class ErrorKind {
  config = 1,
  physics = 2,
  io = 3,
  convergence = 4,
  input = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Malformed configuration text. `key()` names the offending key or section.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(ErrorKind::config, what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// A physical precondition failed (non-positive lifetime, voltage beyond the
/// electrode limit, fractions outside [0,1], ...).
class PhysicsError : public Error {
 public:
  explicit PhysicsError(const std::string& what) : Error(ErrorKind::physics, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

/// An iterative fit ran out of evaluations without meeting its tolerances.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what) : Error(ErrorKind::convergence, what) {}
};

/// Analysis input that cannot be processed: unsorted tags, too few samples,
/// a histogram in the wrong state, ...
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

}  // namespace molsps
