#pragma once

#include <stdexcept>
#include <string>

namespace paragen {

// Shape disagreement between operands.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Bad user-supplied input: empty sequences, out-of-range ids, malformed files.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A NaN/Inf appeared where a finite value was required.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

} // namespace paragen
