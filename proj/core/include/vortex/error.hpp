#pragma once

#include <stdexcept>
#include <string>

namespace vortex {

// Error taxonomy. Every public operation reports failures by throwing one of
// these; the CLI maps each class to a distinct exit code.

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CorruptDataset : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a NaN or Inf reaches the optimizer.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define VORTEX_REQUIRE(cond, msg)                    \
  do {                                               \
    if (!(cond)) throw ::vortex::InvalidArgument(msg); \
  } while (0)

}  // namespace vortex
