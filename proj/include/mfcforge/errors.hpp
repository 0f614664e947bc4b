#pragma once

#include <stdexcept>
#include <string>

namespace mfcforge {

/// Argument outside the domain of an operation (k = 0, zero polynomial, alpha = 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A polynomial root lies on the tolerance annulus around the unit circle.
class MarginalRootError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A linear map has no finite inverse at the requested point.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Enumeration would exceed the supported size.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (files, dimensions, sample times).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mfcforge
