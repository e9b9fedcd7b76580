#pragma once

#include <stdexcept>
#include <string>

namespace rcx {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that violates a documented invariant. The CLI maps the whole
// ValidationError family to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidEdgeSetError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Exhaustive search refused because the graph is too large.
class ComplexityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// API misuse, e.g. a forward trace replayed against different parameters.
class ContractError : public Error {
 public:
  using Error::Error;
};

class InvalidActionError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rcx
