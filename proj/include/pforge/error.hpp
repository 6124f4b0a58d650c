#pragma once

#include <stdexcept>
#include <string>

namespace pforge {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A manifest or config document does not match its schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Inputs are well-formed but break a domain invariant.
class InvariantError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Rejection sampling could not place every item; callers may shrink and retry.
class PlacementError : public Error {
 public:
  using Error::Error;
};

}  // namespace pforge
