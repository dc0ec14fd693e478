#pragma once

#include <stdexcept>
#include <string>

namespace gpbound {

// Numerical failure that invalidates a result (factorization breakdown,
// variance far below zero, non-finite intermediate).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Requested problem size exceeds a configured capacity limit.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// Simulated state left the representable range before the horizon.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

}  // namespace gpbound
