#pragma once

#include <stdexcept>
#include <string>

namespace lvmon {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or unsupported configuration (bad format, out-of-range parameter).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver failed to converge or produced a non-finite value.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// API misuse: shape mismatch, empty input.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A metric is undefined for the given input (e.g. BER >= 0.5, empty class).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace lvmon
