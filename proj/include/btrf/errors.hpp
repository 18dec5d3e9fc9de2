#pragma once

#include <stdexcept>

namespace btrf {

/// Bad argument: empty sets, mismatched lengths, out-of-range indices.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Collinear, coincident or otherwise rank-deficient point sets.
class DegenerateConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fewer observations than a minimal solver needs.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Depth lookup at a pixel without a valid measurement.
class InvalidDepth : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or missing files; the message names the offending path.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace btrf
