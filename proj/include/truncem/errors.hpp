#ifndef TRUNCEM_ERRORS_HPP
#define TRUNCEM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace truncem {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be symmetric positive definite is not.
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

/// The truncation removes (numerically) all probability mass.
class DegenerateTruncation : public Error {
 public:
  using Error::Error;
};

class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

/// Inner Newton solve or outer iteration could not make progress.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

/// Raised when a structural property proved for the model fails numerically,
/// e.g. a singular self-moment Jacobian.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0, std::string key = {})
      : Error(format(what, line, key)), line_(line), key_(std::move(key)) {}

  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  static std::string format(const std::string& what, int line, const std::string& key) {
    std::string out = "config";
    if (line > 0) out += ":" + std::to_string(line);
    if (!key.empty()) out += " [" + key + "]";
    return out + ": " + what;
  }

  int line_;
  std::string key_;
};

}  // namespace truncem

#endif  // TRUNCEM_ERRORS_HPP
