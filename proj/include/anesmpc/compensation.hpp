#pragma once

// Slow-state disturbance rejection: u = v + D x_s cancels the slow-to-fast
// coupling, leaving the nominal fast model x_f+ = A x_f + B v.

#include "anesmpc/pkpd_model.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace anesmpc {

/// Axis-aligned box of drug rates [mg/s, ug/s].
struct InputBox {
  Input lower = Input::Zero();
  Input upper = Input::Zero();

  bool contains(const Input& u, double tol = 0.0) const {
    return (u.array() >= lower.array() - tol).all() &&
           (u.array() <= upper.array() + tol).all();
  }
  Input center() const { return 0.5 * (lower + upper); }
};

/// D = -(B^T B)^{-1} B^T A_s, so that A_s + B D = 0 for this model structure.
Matrix24 compensation_gain(const DynamicsMatrices& m);

enum class DisturbanceBoundMode { WorstCase, Simulated, Fixed };

DisturbanceBoundMode parse_disturbance_bound_mode(std::string_view text);
std::string to_string(DisturbanceBoundMode mode);

struct DisturbanceBound {
  Input m_bar = Input::Zero();
  /// Slow-state bound the estimate was derived from (zero in fixed mode).
  SlowState slow_bound = SlowState::Zero();
  /// Euler steps taken in simulated mode.
  long steps = 0;
};

/// Bound m_bar on |D x_s| with D x_s in [-m_bar, 0].
///   WorstCase: global equilibrium of the full model under u = U.upper.
///   Simulated: running max of |D x_s| along the step response to U.upper,
///              iterated until the state increment is below 1e-9.
///   Fixed:     `fixed` is returned unchanged.
DisturbanceBound disturbance_bound(const DiscreteDynamics& dyn, const InputBox& U,
                                   DisturbanceBoundMode mode,
                                   const std::optional<Input>& fixed = std::nullopt);

/// Pontryagin difference U (-) {-m_bar <= m <= 0} = [lower + m_bar, upper].
/// Throws ModelError when the result is empty.
InputBox tracking_input_set(const InputBox& U, const Input& m_bar);

}  // namespace anesmpc
