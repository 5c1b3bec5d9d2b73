#pragma once

#include <stdexcept>
#include <string>

namespace photstat {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument or model parameter outside its mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Result not representable (rising factorial order, overflow, Hermite order).
class RangeError : public Error {
 public:
  using Error::Error;
};

// Fock-space cutoff would exceed the hard ceiling, or a coefficient was
// requested beyond the computed truncation.
class TruncationError : public Error {
 public:
  using Error::Error;
};

class UnsupportedKindError : public Error {
 public:
  using Error::Error;
};

class ImpossibleSubtractionError : public Error {
 public:
  using Error::Error;
};

// Quadrature data with variance at or below the vacuum level 1/2.
class SubVacuumError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class BinningError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

// Broken internal invariant (e.g. a rejection envelope that does not cover
// its target density). Never expected in correct operation.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace photstat
