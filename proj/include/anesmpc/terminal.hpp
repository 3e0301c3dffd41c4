#pragma once

// Terminal ingredients of the tracking MPC: LQR terminal weight and gain,
// the extended (state, steady input) dynamics under the terminal law, and the
// maximal admissible invariant set for tracking computed by constraint
// propagation until finite determination.

#include "anesmpc/compensation.hpp"
#include "anesmpc/geometry.hpp"
#include "anesmpc/pkpd_model.hpp"

#include <Eigen/Dense>

namespace anesmpc {

struct DareSolution {
  Eigen::MatrixXd P;
  /// Stabilizing gain with the convention A + B K Schur.
  Eigen::MatrixXd K;
  int iterations = 0;
  double residual = 0.0;
};

/// Riccati recursion from P0 = Q until the step change is below 1e-12
/// (relative to |P|), capped at 1e5 iterations. Checks stabilizability of
/// (A, B) and observability of (Q^{1/2}, A); throws ModelError on failure.
DareSolution solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

/// Max-abs-row-sum norm of A'PA - P - A'PB (R + B'PB)^{-1} B'PA + Q.
double dare_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                     const Eigen::MatrixXd& P);

/// Smallest k with rank [B, AB, ..., A^{k-1}B] = n; throws if uncontrollable.
int controllability_index(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

struct ExtendedDynamics {
  Eigen::MatrixXd a_w;  // [[A + BK, B(I - psi)], [0, I]]
  Eigen::MatrixXd psi;  // K (I - A)^{-1} B
};

ExtendedDynamics extended_dynamics(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                   const Eigen::MatrixXd& K);

/// Scaled box lambda*V about the center of V.
InputBox scale_box(const InputBox& V, double lambda);

/// Constraint set over w = (x, v_a): K x + (I - psi) v_a in V and
/// v_a in lambda*V. The state itself is unconstrained. 8 rows.
Polyhedron build_w_lambda(const Eigen::MatrixXd& K, const Eigen::MatrixXd& psi,
                          const InputBox& V, double lambda);

struct InvariantSet {
  Polyhedron set;
  int determination_index = 0;  // k*
};

/// {w : F A_w^i w <= g, i = 0..k*}, stopping at the first k* for which every
/// row of F A_w^{k*+1} is redundant. Rows are normalized to unit max-norm,
/// which makes k* independent of the row scaling of W.
InvariantSet max_admissible_invariant_set(const Eigen::MatrixXd& a_w, const Polyhedron& W,
                                          int max_iterations = 500);

struct TerminalIngredients {
  Eigen::MatrixXd K;    // 2x4
  Eigen::MatrixXd P;    // 4x4
  Eigen::MatrixXd psi;  // 2x2
  Eigen::MatrixXd a_w;  // 6x6
  Polyhedron w_lambda;
  Polyhedron x_a;
  double lambda = 0.99;
  int determination_index = 0;
  int dare_iterations = 0;
  double dare_residual = 0.0;
};

TerminalIngredients compute_terminal_ingredients(const DiscreteDynamics& dyn,
                                                 const Eigen::MatrixXd& Q,
                                                 const Eigen::MatrixXd& R,
                                                 const InputBox& V, double lambda);

}  // namespace anesmpc
