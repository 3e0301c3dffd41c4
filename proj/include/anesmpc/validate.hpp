#pragma once

// Property checks over a full controller setup, reported as a pass/fail
// matrix. Used by the `validate` subcommand and the acceptance binary.

#include "anesmpc/problem.hpp"
#include "anesmpc/qp.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace anesmpc {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool passed() const;
  const CheckResult* find(const std::string& name) const;
};

struct ValidationOptions {
  std::uint64_t seed = 20240917;
  int random_trials = 100;
  int invariance_samples = 1000;
  int invariance_steps = 200;
  /// Fault injection: run every check with D replaced by -D.
  bool flip_compensation = false;
};

/// Closed loop of the full plant with the nominal fast model integrated
/// alongside from the same v sequence.
struct ClosedLoopTrace {
  SimLog log;
  std::vector<ControlOutput> outputs;
  std::vector<FastState> nominal_xf;  // nominal model state at each record
  double max_divergence = 0.0;        // max |x_f - nominal|
  bool nonnegative = true;
  long infeasible_step = -1;          // >= 0 when a solve failed
  std::string error;
};

ClosedLoopTrace trace_closed_loop(const ControlSetup& setup, Controller& ctrl,
                                  double duration);

/// Exhaustive active-set oracle for small strictly convex QPs: solves the
/// equality-constrained KKT system for every subset of inequality rows and
/// keeps the best feasible candidate.
struct EnumeratedQp {
  bool feasible = false;
  Eigen::VectorXd z;
  double objective = 0.0;
};

EnumeratedQp enumerate_active_sets(const QpProblem& p, double tol = 1e-9);

/// Random strictly convex QP with n variables, q inequality rows (feasible).
QpProblem random_convex_qp(int n, int q, std::uint64_t seed);

ValidationReport run_validation(const ControlSetup& setup, const ValidationOptions& options = {});

void print_report(std::ostream& os, const ValidationReport& report);

}  // namespace anesmpc
