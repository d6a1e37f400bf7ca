#pragma once

#include <stdexcept>
#include <string>

namespace vitnt {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes that cannot be combined.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents (bad magic, unsupported version, bad header).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Payload shorter or longer than its header claims.
class LengthError : public FormatError {
 public:
  using FormatError::FormatError;
};

// A model whose tensors do not match its configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Index outside the valid range (e.g. a block that does not exist).
class RangeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace vitnt
