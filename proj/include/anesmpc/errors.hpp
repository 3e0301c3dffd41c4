#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace anesmpc {

/// Invalid parameters or configuration values (bad field, out-of-range knob).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model or numerical computation could not be carried out
/// (unstable discretization, empty set, nonconvergent iteration).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The MPC optimization problem has no feasible point at a given step.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, std::ptrdiff_t step = -1)
      : std::runtime_error(what), step_(step) {}
  std::ptrdiff_t step() const noexcept { return step_; }

 private:
  std::ptrdiff_t step_;
};

}  // namespace anesmpc
