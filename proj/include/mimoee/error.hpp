#pragma once

#include <stdexcept>
#include <string>

namespace mimoee {

// Base of every error raised by the library. Callers that only care about
// "something went wrong" catch this; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonPositiveField : public Error {
 public:
  explicit NonPositiveField(std::string field)
      : Error("field must be positive: " + field), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ZeroPower : public Error {
 public:
  ZeroPower() : Error("total transmit power is zero") {}
  using Error::Error;
};

class NotMiso : public Error {
 public:
  NotMiso() : Error("operation requires n_r = 1 (MISO)") {}
};

class NotSimo : public Error {
 public:
  NotSimo() : Error("operation requires n_t = 1 (SIMO)") {}
};

class BracketFailure : public Error {
 public:
  using Error::Error;
};

class GridTooLarge : public Error {
 public:
  using Error::Error;
};

class NoWitness : public Error {
 public:
  using Error::Error;
};

class EvaluationFailure : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace mimoee
