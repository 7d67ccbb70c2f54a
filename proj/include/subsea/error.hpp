#pragma once

#include <stdexcept>
#include <string>

namespace subsea {

// Bad input data or configuration. The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed record in an input stream; the message names the location.
class ParseError : public InputError {
 public:
  using InputError::InputError;
};

// An internal consistency check failed. The CLI maps this to exit code 2.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace subsea
