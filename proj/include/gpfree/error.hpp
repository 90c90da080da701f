#pragma once

#include <stdexcept>
#include <string>

namespace gpfree {

// Base for every error raised by the library. The CLI maps subclasses onto
// exit codes: DomainError -> 1, ResourceLimit -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on a mathematical input failed (x < 16, h >= sqrt(x), ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class NotAGeometricProgression : public DomainError {
 public:
  using DomainError::DomainError;
};

class TrivialProgression : public DomainError {
 public:
  using DomainError::DomainError;
};

class TooFewSurvivors : public DomainError {
 public:
  using DomainError::DomainError;
};

class MalformedSelection : public DomainError {
 public:
  using DomainError::DomainError;
};

// A configured memory / horizon / node budget would be exceeded.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

}  // namespace gpfree
