#pragma once

#include <stdexcept>
#include <string>

namespace hardykit {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A generic radial density that is not strictly positive and finite.
class DensityError : public Error {
 public:
  DensityError(const std::string& what, double r) : Error(what), r_(r) {}
  double r() const noexcept { return r_; }

 private:
  double r_;
};

/// Non-finite integrand sample.
class IntegrandError : public Error {
 public:
  IntegrandError(const std::string& what, double location)
      : Error(what), location_(location) {}
  double location() const noexcept { return location_; }

 private:
  double location_;
};

/// The integral did not converge; usually means it is infinite.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double partial_value)
      : Error(what), partial_value_(partial_value) {}
  double partial_value() const noexcept { return partial_value_; }

 private:
  double partial_value_;
};

/// An L1 proviso attached to one of the conditions does not hold.
class ProvisoError : public Error {
 public:
  using Error::Error;
};

/// A negative power of a cumulative weight hit zero or infinity.
class MakesSenseError : public Error {
 public:
  MakesSenseError(const std::string& what, double r) : Error(what), r_(r) {}
  double r() const noexcept { return r_; }

 private:
  double r_;
};

/// A trial function with zero weighted norm.
class DegenerateTrialError : public Error {
 public:
  using Error::Error;
};

}  // namespace hardykit
