#pragma once

#include <stdexcept>
#include <string>

namespace geowalk {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NonFiniteInput : public Error {
 public:
  using Error::Error;
};

// The principal matrix logarithm is undefined (rotation by pi).
class CutLocus : public Error {
 public:
  using Error::Error;
};

class ManifoldMismatch : public Error {
 public:
  using Error::Error;
};

class AcceptanceTooLow : public Error {
 public:
  using Error::Error;
};

class InvalidStart : public Error {
 public:
  using Error::Error;
};

class InvalidParams : public Error {
 public:
  using Error::Error;
};

// A user oracle returned a non-finite value.
class OracleError : public Error {
 public:
  using Error::Error;
};

// A checked inequality's hypothesis does not hold for the given input.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class NotConvex : public Error {
 public:
  using Error::Error;
};

class SeparationViolated : public Error {
 public:
  using Error::Error;
};

class ScheduleTooAggressive : public Error {
 public:
  using Error::Error;
};

class Unsupported : public Error {
 public:
  using Error::Error;
};

}  // namespace geowalk
