#pragma once

#include <stdexcept>
#include <string>

namespace scatterloc {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or missing configuration value. `key()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Problem size exceeds a configured limit.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Weak-probe assumption violated: some basis state has |A_u|^2 < 0.
class CouplingTooStrong : public Error {
 public:
  using Error::Error;
};

/// A projection annihilated the state (norm below 1e-300 before renormalizing).
class ZeroNormProjection : public Error {
 public:
  using Error::Error;
};

/// Two states were expanded over different bases.
class BasisMismatch : public Error {
 public:
  using Error::Error;
};

/// Eigensolver failed or its residual contract was not met.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// File-system failure while writing results.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace scatterloc
