#pragma once

#include <stdexcept>
#include <string>

namespace causality {

/// Base class of every error raised by the library.
class CausalityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public CausalityError {
 public:
  using CausalityError::CausalityError;
};

class ConstantColumn : public CausalityError {
 public:
  using CausalityError::CausalityError;
};

class SeriesTooShort : public CausalityError {
 public:
  using CausalityError::CausalityError;
};

/// Raised when SSE of the unrestricted model is exactly zero.
class DegenerateTest : public CausalityError {
 public:
  using CausalityError::CausalityError;
};

class NotEnoughPoints : public CausalityError {
 public:
  using CausalityError::CausalityError;
};

/// Too many points share their k-th neighbour at distance zero.
class DegenerateDistances : public CausalityError {
 public:
  using CausalityError::CausalityError;
};

class DivergenceAfterRetries : public CausalityError {
 public:
  using CausalityError::CausalityError;
};

class MissingPair : public CausalityError {
 public:
  using CausalityError::CausalityError;
};

class ConfigError : public CausalityError {
 public:
  using CausalityError::CausalityError;
};

}  // namespace causality
