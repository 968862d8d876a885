#pragma once

#include <stdexcept>
#include <string>

namespace descfm {

// Malformed or inconsistent input (files, SMILES, CSV rows, shapes passed in by
// callers). The CLI maps this to exit code 3.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values or failed numerical procedures. The CLI maps this to exit
// code 4.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shape or index contract violated by a caller.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace descfm
