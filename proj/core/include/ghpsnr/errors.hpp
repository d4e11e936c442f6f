#pragma once

#include <stdexcept>
#include <string>

namespace ghpsnr {

// Error taxonomy shared by the library and the CLI. Each family maps onto
// one process exit code in the tool (see tools/main.cpp).

/// File system and format-level failures (unreadable file, malformed PLY/CSV).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data that parses but violates a domain invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure: rank-deficient fits, zero variance, degenerate neighborhoods.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ghpsnr
