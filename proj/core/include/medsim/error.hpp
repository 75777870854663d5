#pragma once

#include <stdexcept>
#include <string>

namespace medsim {

// Base for everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data or arguments. The CLI maps this to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A failure while doing the work (I/O, diverging training, ...). Exit code 2.
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace medsim
