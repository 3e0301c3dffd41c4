#pragma once

// MPC for tracking with an artificial steady input v_a as decision variable.
// The QP is condensed over z = (v_0, ..., v_{N-1}, v_a): states are
// eliminated through x_{k+1} = A x_k + B v_k and x_a = (I - A)^{-1} B v_a.

#include "anesmpc/compensation.hpp"
#include "anesmpc/pkpd_model.hpp"
#include "anesmpc/qp.hpp"
#include "anesmpc/terminal.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace anesmpc {

/// Convex offset cost weight * (direction . v_a - offset)^2 + linear . v_a.
struct OffsetCost {
  double weight = 10.0;
  Input direction = Input(1.0, -0.5);
  double offset = 0.0;
  Input linear = Input::Zero();

  double operator()(const Input& v_a) const {
    const double r = direction.dot(v_a) - offset;
    return weight * r * r + linear.dot(v_a);
  }
};

struct MpcConfig {
  int horizon = 24;
  Matrix4 Q = Eigen::Vector4d(1.0, 10.0, 1.0, 10.0).asDiagonal();
  Eigen::Matrix2d R = Eigen::Matrix2d::Identity();
  double epsilon = 1e-6;
  double lambda = 0.99;
  OffsetCost offset_cost;
  double y_ref = 50.0;

  void validate() const;
};

/// Admissible steady inputs: gain . v_a = level, lower <= v_a <= upper.
struct SteadyInputSet {
  Eigen::RowVector2d gain = Eigen::RowVector2d::Zero();
  double level = 0.0;
  Input lower = Input::Zero();
  Input upper = Input::Zero();
};

/// Bounds [V.lower + eps, V.upper - eps] on the steady output line; throws
/// ModelError if the segment is empty.
SteadyInputSet build_steady_input_set(const SteadyOutputRow& row, const InputBox& V,
                                      double epsilon);

/// End points of the segment {gain . v = level} clipped to the box.
std::pair<Input, Input> steady_segment(const SteadyInputSet& zs);

struct ControlOutput {
  Input u = Input::Zero();
  Input v0 = Input::Zero();
  Input v_a = Input::Zero();
  FastState x_a = FastState::Zero();
  std::vector<FastState> predicted_xf;  // N + 1 states
  double cost = 0.0;
  QpStatus solver_status = QpStatus::MaxIterations;
  KktResiduals kkt;
  int qp_iterations = 0;
  bool clamped = false;
  double solve_ms = 0.0;
};

/// Everything the controller needs, gathered once.
struct ControllerIngredients {
  DiscreteDynamics dynamics;
  Matrix24 compensation = Matrix24::Zero();
  InputBox applied_box;   // U
  InputBox tracking_box;  // V
  SteadyInputSet steady;
  TerminalIngredients terminal;
  MpcConfig config;
};

class Controller {
 public:
  /// Validates the ingredients (horizon >= controllability index, nonempty
  /// steady set) and precomputes the condensed QP template.
  explicit Controller(ControllerIngredients ingredients);

  /// Solves the tracking problem from the measured state. Throws
  /// InfeasibleError naming the constraint groups in the infeasibility
  /// certificate.
  ControlOutput step(const FastState& xf, const SlowState& xs);

  /// Forget the warm start.
  void reset() { previous_.reset(); }

  /// QP for a given initial fast state (the template is affine in x0).
  QpProblem problem_for(const FastState& x0) const;
  /// Constant term of the objective so that objective + constant is the
  /// tracking cost.
  double cost_constant(const FastState& x0) const;

  /// Decision vector of the predictable warm start, or nullopt.
  std::optional<Eigen::VectorXd> shifted_warm_start() const;

  const ControllerIngredients& ingredients() const { return ing_; }
  const Matrix42& steady_map() const { return steady_map_; }
  int horizon() const { return ing_.config.horizon; }
  Eigen::Index num_variables() const { return 2 * horizon() + 2; }
  Eigen::Index num_box_rows() const { return 4 * horizon() + 4; }
  Eigen::Index num_terminal_rows() const { return ing_.terminal.x_a.rows(); }
  int controllability_index() const { return ctrb_index_; }

  /// Tracking cost of a decision vector from x0 evaluated by forward
  /// simulation (independent of the condensed matrices).
  double rollout_cost(const FastState& x0, const Eigen::VectorXd& z) const;

 private:
  struct Previous {
    Eigen::VectorXd z;
    FastState terminal_state;
  };

  ControllerIngredients ing_;
  Matrix42 steady_map_;
  int ctrb_index_ = 0;
  QpProblem base_;             // f and b_in for x0 = 0
  Eigen::MatrixXd f_state_;    // f = f_state x0 + base_.f
  Eigen::MatrixXd cost_state_; // constant = x0' C x0 + offset constant
  double cost_offset_ = 0.0;
  Eigen::MatrixXd terminal_state_;  // b_in terminal rows -= terminal_state x0
  std::vector<Eigen::MatrixXd> state_powers_;  // A^k, k = 0..N
  std::vector<Eigen::MatrixXd> input_maps_;    // x_k = A^k x0 + G_k z
  std::optional<Previous> previous_;
};

}  // namespace anesmpc
