// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace lexstyle {

// Base for every error the library raises. The CLI maps InputError to exit
// code 2 and everything else to 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed files, violated preconditions, bad config.
class InputError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage was requested out of order.
class LineageError : public InputError {
 public:
  using InputError::InputError;
};

// Non-finite values in a loss or gradient.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace lexstyle
