#pragma once

// Dense convex QP
//   min 1/2 z'Hz + f'z   s.t.  A_eq z = b_eq,  A_in z <= b_in
// solved by a primal active-set method. Equality rows stay in the working
// set; a cold start obtains its first feasible point from the LP engine.

#include <Eigen/Dense>

#include <optional>
#include <string>

namespace anesmpc {

struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd A_in;
  Eigen::VectorXd b_in;

  Eigen::Index num_variables() const { return H.rows(); }
  /// Throws ConfigError on inconsistent sizes or non-symmetric H.
  void validate() const;
  double objective(const Eigen::VectorXd& z) const { return 0.5 * z.dot(H * z) + f.dot(z); }
};

enum class QpStatus { Optimal, Infeasible, MaxIterations };

const char* to_string(QpStatus status);

struct KktResiduals {
  double stationarity = 0.0;
  double primal_eq = 0.0;
  double primal_in = 0.0;
  double complementarity = 0.0;

  double max() const;
};

struct QpSolution {
  QpStatus status = QpStatus::MaxIterations;
  Eigen::VectorXd z;
  double objective = 0.0;
  Eigen::VectorXd y_eq;  // equality multipliers
  Eigen::VectorXd y_in;  // inequality multipliers (>= 0)
  KktResiduals kkt;
  int iterations = 0;
  bool regularized = false;
  /// For Infeasible: y >= 0 over the stacked rows [A_eq; -A_eq; A_in] with
  /// y' [A_eq; -A_eq; A_in] = 0 and y' [b_eq; -b_eq; b_in] < 0.
  Eigen::VectorXd certificate;
  std::string message;
};

struct QpSettings {
  int max_iterations = 0;  // 0: 10 (n + q) + 100
  double feasibility_tol = 1e-9;
  double multiplier_tol = 1e-10;
  double regularization = 1e-9;
  double regularization_threshold = 1e-10;
};

/// Symmetric smallest eigenvalue of H (used for the regularization rule).
double min_eigenvalue(const Eigen::MatrixXd& H);

QpSolution qp_solve(const QpProblem& p, const std::optional<Eigen::VectorXd>& warm_start = std::nullopt,
                    const QpSettings& settings = {});

KktResiduals kkt_residuals(const QpProblem& p, const Eigen::VectorXd& z,
                           const Eigen::VectorXd& y_eq, const Eigen::VectorXd& y_in);

}  // namespace anesmpc
