#pragma once

#include <stdexcept>
#include <string>

namespace zidrm {

// Base class for every error raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// An input sample contained no observations at all.
class EmptySampleError : public Error {
 public:
  using Error::Error;
};

// A sample has no observation above the zero threshold; the positive-part
// model cannot be estimated.
class NoPositivesError : public Error {
 public:
  using Error::Error;
};

// A parameter left its admissible domain (nu or rho on a boundary,
// nonpositive argument of a log, map evaluated outside its domain, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Vector/matrix dimensions of a functional, map, or parameter disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// exp(theta'Q(x)) left the representable range.  Reported rather than
// clamped so callers can react (the line search treats it as -inf).
class OverflowError : public Error {
 public:
  using Error::Error;
};

// A matrix that the theory requires to be invertible is numerically
// singular (condition number above threshold).
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

// A plug-in variance came out negative.
class NegativeVarianceError : public Error {
 public:
  using Error::Error;
};

// Log-scale interval requested for a nonpositive point estimate.
class NonPositivePhiError : public Error {
 public:
  using Error::Error;
};

}  // namespace zidrm
