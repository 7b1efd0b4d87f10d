#pragma once

#include <stdexcept>
#include <string>

namespace daimc {

enum class ErrorKind {
  invalid_input,
  numeric,
  format,
  constraint_violation,
  io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& msg) : Error(ErrorKind::invalid_input, msg) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(ErrorKind::numeric, msg) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& msg) : Error(ErrorKind::format, msg) {}
};

class ConstraintViolation : public Error {
 public:
  explicit ConstraintViolation(const std::string& msg)
      : Error(ErrorKind::constraint_violation, msg) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(ErrorKind::io, msg) {}
};

}  // namespace daimc
