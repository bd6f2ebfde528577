#pragma once

#include <stdexcept>
#include <string>

namespace arxtrend {

// User errors are bad input or data (CLI exit 1); environment errors are
// network or filesystem failures (CLI exit 2).
enum class ErrorKind { User, Environment, NotEnumerated };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UserError : public Error {
 public:
  explicit UserError(const std::string& what) : Error(ErrorKind::User, what) {}
};

class EnvironmentError : public Error {
 public:
  explicit EnvironmentError(const std::string& what)
      : Error(ErrorKind::Environment, what) {}
};

// Raised when a label scheme is requested that has no built-in enumeration
// and no scheme file was supplied.
class NotEnumeratedError : public Error {
 public:
  explicit NotEnumeratedError(const std::string& what)
      : Error(ErrorKind::NotEnumerated, what) {}
};

}  // namespace arxtrend
