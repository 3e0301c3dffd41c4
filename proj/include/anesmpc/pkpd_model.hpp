#pragma once

// Two-drug (propofol / remifentanil) compartment model split into fast and
// slow parts, and the additive Hill map from effect-site concentrations to BIS.
//
// State ordering is fixed throughout the library:
//   fast state  (p1, p4, r1, r4)  blood and effect-site, propofol then remifentanil
//   slow state  (p2, p3, r2, r3)  muscle and fat compartments
//   input       (u_p, u_r)        infusion rates [mg/s, ug/s]
// The assembled 8-state vector is (fast, slow).

#include <Eigen/Dense>

#include <string_view>

namespace anesmpc {

using FastState = Eigen::Vector4d;
using SlowState = Eigen::Vector4d;
using FullState = Eigen::Matrix<double, 8, 1>;
using Input = Eigen::Vector2d;
using Matrix4 = Eigen::Matrix4d;
using Matrix42 = Eigen::Matrix<double, 4, 2>;
using Matrix24 = Eigen::Matrix<double, 2, 4>;
using Matrix8 = Eigen::Matrix<double, 8, 8>;
using Matrix82 = Eigen::Matrix<double, 8, 2>;

enum FastIndex : int { kP1 = 0, kP4 = 1, kR1 = 2, kR4 = 3 };
enum SlowIndex : int { kP2 = 0, kP3 = 1, kR2 = 2, kR3 = 3 };

/// Per-drug three-compartment PK parameters plus effect-site rate, in SI
/// per-second units: volumes [L], clearances [L/s], ke [1/s].
struct DrugPkParams {
  double V1 = 0, V2 = 0, V3 = 0;
  double Cl1 = 0, Cl2 = 0, Cl3 = 0;
  double ke = 0;

  /// Throws ConfigError naming the first nonpositive field.
  void validate(std::string_view drug) const;
};

/// Additive-interaction Hill parameters. Ce50p in mg/L, Ce50r in ug/L.
struct PdParams {
  double E0 = 0, Emax = 0, gamma = 0;
  double Ce50p = 0, Ce50r = 0;

  void validate() const;
};

/// The five coupling matrices of the split model:
///   dx_f = fast x_f + input u + slow_on_fast x_s
///   dx_s = slow x_s + fast_on_slow x_f
struct DynamicsMatrices {
  Matrix4 fast = Matrix4::Zero();
  Matrix4 slow_on_fast = Matrix4::Zero();
  Matrix4 slow = Matrix4::Zero();
  Matrix4 fast_on_slow = Matrix4::Zero();
  Matrix42 input = Matrix42::Zero();

  /// Assembled 8x8 state matrix and 8x2 input matrix over (fast, slow).
  Matrix8 full_state_matrix() const;
  Matrix82 full_input_matrix() const;
};

struct ContinuousDynamics {
  DynamicsMatrices m;
};

struct DiscreteDynamics {
  DynamicsMatrices m;
  double ts = 0;  // sampling period [s]
};

ContinuousDynamics build_continuous(const DrugPkParams& propofol,
                                    const DrugPkParams& remifentanil);

/// Forward Euler: A_d = I + ts A, B_d = ts B. Throws ModelError when the
/// discrete fast matrix has a negative entry or spectral radius >= 1.
DiscreteDynamics discretize_euler(const ContinuousDynamics& cont, double ts);

/// One Euler step of the full 8-state model.
void step_full(const DiscreteDynamics& dyn, FastState& xf, SlowState& xs,
               const Input& u);

double bis_output(const FastState& xf, const PdParams& pd);

/// Combined normalized effect-site level U = p4/Ce50p + r4/Ce50r that yields
/// BIS y_ref. Throws ModelError outside (E0 - Emax, E0].
double hill_invert(double y_ref, const PdParams& pd);

/// Row G mapping the fast state to the normalized effect level U.
Eigen::RowVector4d effect_row(const PdParams& pd);

/// Equilibrium map x_a = (I - A_d)^{-1} B_d v_a of the nominal fast model.
Matrix42 steady_state_map(const DiscreteDynamics& dyn);

/// Steady-state output constraint gain * v_a = level.
struct SteadyOutputRow {
  Eigen::RowVector2d gain;
  double level = 0;
};

SteadyOutputRow steady_output_row(const DiscreteDynamics& dyn,
                                  const PdParams& pd, double y_ref);

double spectral_radius(const Eigen::MatrixXd& a);

}  // namespace anesmpc
