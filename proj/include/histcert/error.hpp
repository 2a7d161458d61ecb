#pragma once

#include <stdexcept>
#include <string>

namespace histcert {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller supplied data that violates a documented precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Two independent numerical routes disagreed beyond their tolerance.
class InternalInconsistency : public Error {
 public:
  using Error::Error;
};

/// A quantity is undefined for the given input (pole evaluation, unstable gain).
class Undefined : public Error {
 public:
  using Error::Error;
};

/// No closed-form rate theorem covers the given method and sector.
class NoClosedForm : public Error {
 public:
  using Error::Error;
};

/// Not enough usable data to estimate a convergence rate.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidInput(message);
}

}  // namespace detail
}  // namespace histcert
