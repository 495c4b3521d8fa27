#pragma once

#include <stdexcept>
#include <string>

namespace qtrbm {

/// Base class for all library errors. The CLI maps each subclass to an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes of two arguments disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable input data (files, datasets, checkpoints).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values during training or inference.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Exact enumeration requested for a model above the size cap.
class SizeLimitError : public Error {
 public:
  using Error::Error;
};

/// Internal consistency broken between related objects (e.g. trace vs params).
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace qtrbm
