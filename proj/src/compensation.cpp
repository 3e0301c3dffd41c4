#include "anesmpc/compensation.hpp"

#include "anesmpc/errors.hpp"

#include <sstream>

namespace anesmpc {

namespace {
constexpr double kSteadyTolerance = 1e-9;
constexpr long kMaxSteadySteps = 1'000'000;
}  // namespace

Matrix24 compensation_gain(const DynamicsMatrices& m) {
  const Eigen::Matrix2d btb = m.input.transpose() * m.input;
  Eigen::LLT<Eigen::Matrix2d> llt(btb);
  if (llt.info() != Eigen::Success ||
      btb.diagonal().minCoeff() <= 0.0) {
    throw ModelError("input matrix B is rank deficient; compensation gain undefined");
  }
  return -llt.solve(m.input.transpose() * m.slow_on_fast);
}

DisturbanceBoundMode parse_disturbance_bound_mode(std::string_view text) {
  if (text == "worst-case") return DisturbanceBoundMode::WorstCase;
  if (text == "simulated") return DisturbanceBoundMode::Simulated;
  if (text == "fixed") return DisturbanceBoundMode::Fixed;
  throw ConfigError("disturbance_bound_mode must be one of worst-case, simulated, fixed (got '" +
                    std::string(text) + "')");
}

std::string to_string(DisturbanceBoundMode mode) {
  switch (mode) {
    case DisturbanceBoundMode::WorstCase: return "worst-case";
    case DisturbanceBoundMode::Simulated: return "simulated";
    case DisturbanceBoundMode::Fixed: return "fixed";
  }
  return "unknown";
}

DisturbanceBound disturbance_bound(const DiscreteDynamics& dyn, const InputBox& U,
                                   DisturbanceBoundMode mode,
                                   const std::optional<Input>& fixed) {
  DisturbanceBound out;
  const Matrix24 gain = compensation_gain(dyn.m);

  switch (mode) {
    case DisturbanceBoundMode::Fixed: {
      if (!fixed) throw ConfigError("disturbance_bound_mode = fixed requires m_bar");
      if ((fixed->array() < 0.0).any()) throw ConfigError("m_bar entries must be >= 0");
      out.m_bar = *fixed;
      return out;
    }
    case DisturbanceBoundMode::WorstCase: {
      // x = A_d x + B_d u  <=>  (I - A_d) x = B_d u over the full state.
      const Matrix8 gap = Matrix8::Identity() - dyn.m.full_state_matrix();
      Eigen::FullPivLU<Matrix8> lu(gap);
      if (!lu.isInvertible()) throw ModelError("full model has no unique equilibrium");
      const FullState x = lu.solve(dyn.m.full_input_matrix() * U.upper);
      out.slow_bound = x.tail<4>();
      out.m_bar = (-(gain * out.slow_bound)).cwiseMax(0.0);
      return out;
    }
    case DisturbanceBoundMode::Simulated: {
      FastState xf = FastState::Zero();
      SlowState xs = SlowState::Zero();
      Input peak = Input::Zero();
      for (long k = 0; k < kMaxSteadySteps; ++k) {
        const FastState pf = xf;
        const SlowState ps = xs;
        step_full(dyn, xf, xs, U.upper);
        peak = peak.cwiseMax((gain * xs).cwiseAbs());
        out.slow_bound = out.slow_bound.cwiseMax(xs);
        const double inc = std::max((xf - pf).cwiseAbs().maxCoeff(),
                                    (xs - ps).cwiseAbs().maxCoeff());
        if (inc <= kSteadyTolerance) {
          out.m_bar = peak;
          out.steps = k + 1;
          return out;
        }
      }
      throw ModelError("disturbance bound simulation did not reach steady state within 1e6 steps");
    }
  }
  throw ConfigError("unknown disturbance bound mode");
}

InputBox tracking_input_set(const InputBox& U, const Input& m_bar) {
  InputBox V;
  V.lower = U.lower + m_bar;
  V.upper = U.upper;
  if ((V.lower.array() > V.upper.array()).any()) {
    std::ostringstream msg;
    msg << "input box too tight for disturbance bound (m_bar = " << m_bar.transpose()
        << ", U width = " << (U.upper - U.lower).transpose() << ")";
    throw ModelError(msg.str());
  }
  return V;
}

}  // namespace anesmpc
