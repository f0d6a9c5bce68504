#pragma once

#include <stdexcept>
#include <string>

namespace dvca {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// An invariant of the data model does not hold; `field` is a JSON-pointer
/// style path to the offending value.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class OrderError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class SimPanic : public Error {
 public:
  using Error::Error;
};

}  // namespace dvca
