#pragma once

#include <stdexcept>
#include <string>

namespace rsft {

/// Invalid input to a library operation (violated precondition or invariant).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An enumeration would exceed its configured cap; partial results are never returned.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The burn-in doubling schedule did not reach the requested tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double gap) : std::runtime_error(what), gap_(gap) {}
  double gap() const { return gap_; }

 private:
  double gap_;
};

/// A time change is too short to resolve the requested intervals.
class HorizonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rsft
