#pragma once

#include <stdexcept>
#include <string>

namespace frk {

// Base for everything thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad input text (group descriptors, element grammar, matrix dumps).
struct ParseError : Error {
  std::size_t position;
  ParseError(const std::string& what, std::size_t pos)
      : Error(what + " (at position " + std::to_string(pos) + ")"), position(pos) {}
  explicit ParseError(const std::string& what) : Error(what), position(0) {}
};

// A documented operation precondition was violated by the caller.
struct PreconditionError : Error {
  using Error::Error;
};

// A mathematically guaranteed bound or invariant failed.  This falsifies the
// implementation, never the inputs, and maps to CLI exit code 3.
struct InvariantViolation : Error {
  using Error::Error;
};

}  // namespace frk
