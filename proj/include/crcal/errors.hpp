#pragma once

#include <stdexcept>
#include <string>

namespace crcal {

// Malformed input or violated precondition. The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerically undefined quantity (IPCW weight with zero censoring survival,
// near-zero predicted survival, ...). The CLI maps this to exit code 3.
class NumericError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace crcal
