#pragma once

#include <stdexcept>
#include <string>

namespace sgtomo {

// Base of every error the library raises. Callers that only care about
// "bad input" vs "numerical breakdown" can catch the two intermediate types.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
  using Error::Error;
};

class InvalidDirection : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class OutOfBall : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class InvalidState : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class InvalidFrame : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class NumericalError : public Error {
public:
  using Error::Error;
};

// |a·r| >= 1 in a likelihood denominator.
class SingularDenominator : public NumericalError {
public:
  using NumericalError::NumericalError;
};

// Zero Born probability under a non-zero count when renormalizing a POM element.
class SingularRenormalization : public NumericalError {
public:
  using NumericalError::NumericalError;
};

} // namespace sgtomo
