#pragma once

#include <stdexcept>
#include <string>

namespace rotgrad {

// Base for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative routine hit its iteration cap or saw non-finite data.
class NumericFailure : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

// A raw output lies where the manifold mapping is undefined (zero norm,
// collinear 6D columns, rank-deficient 9D, repeated smallest 10D eigenvalue).
class DegenerateInput : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

// Invalid user configuration (unknown names, out-of-range parameters).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rotgrad
