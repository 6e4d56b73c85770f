#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace harmonia {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A method/scenario pairing (or a network/geometry pairing) that cannot work.
/// The CLI maps this to exit code 2.
class IncompatibleError : public Error {
 public:
  using Error::Error;
};

/// Raised when a loss, gradient or field value stops being finite.
/// `index` names the epoch, step or parameter involved when known.
class NonFiniteError : public Error {
 public:
  NonFiniteError(const std::string& what, std::ptrdiff_t index = -1)
      : Error(what), index_(index) {}
  std::ptrdiff_t index() const noexcept { return index_; }

 private:
  std::ptrdiff_t index_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace harmonia
