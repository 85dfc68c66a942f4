#pragma once

#include <stdexcept>
#include <string>

namespace lowrank {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside its documented range (rank, tolerance, epoch index...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Input data is malformed: non-finite entries, invalid distributions, empty batches.
class InputError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// The requested quantity is undefined for this input (e.g. sign of the zero matrix).
class SingularInputError : public Error {
 public:
  using Error::Error;
};

/// Rejection sampling ran out of draws.
class GenerationError : public Error {
 public:
  using Error::Error;
};

class ReducibleChainError : public Error {
 public:
  using Error::Error;
};

class NonMixingError : public Error {
 public:
  using Error::Error;
};

class BudgetOverflowError : public Error {
 public:
  using Error::Error;
};

/// The maximum entry of a matrix is not unique, so gaps are undefined.
class TieError : public Error {
 public:
  using Error::Error;
};

/// A proven inequality failed; indicates a bug rather than bad input.
class InvariantError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lowrank
