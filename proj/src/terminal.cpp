#include "anesmpc/terminal.hpp"

#include "anesmpc/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

namespace anesmpc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kDareStepTol = 1e-12;
constexpr int kDareMaxIterations = 100'000;
constexpr double kDareResidualTol = 1e-8;
constexpr double kRedundancyTol = 1e-9;

bool is_stabilizable(const MatrixXd& A, const MatrixXd& B) {
  const Index n = A.rows();
  Eigen::EigenSolver<MatrixXd> es(A, false);
  for (Index i = 0; i < n; ++i) {
    const std::complex<double> lam = es.eigenvalues()[i];
    if (std::abs(lam) < 1.0 - 1e-12) continue;
    Eigen::MatrixXcd pbh(n, n + B.cols());
    pbh.leftCols(n) = A.cast<std::complex<double>>() -
                      lam * Eigen::MatrixXcd::Identity(n, n);
    pbh.rightCols(B.cols()) = B.cast<std::complex<double>>();
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(pbh);
    lu.setThreshold(1e-10);
    if (lu.rank() < n) return false;
  }
  return true;
}

bool is_observable(const MatrixXd& C, const MatrixXd& A) {
  const Index n = A.rows();
  MatrixXd obs(C.rows() * n, n);
  MatrixXd block = C;
  for (Index k = 0; k < n; ++k) {
    obs.middleRows(k * C.rows(), C.rows()) = block;
    block = block * A;
  }
  Eigen::FullPivLU<MatrixXd> lu(obs);
  lu.setThreshold(1e-10);
  return lu.rank() == n;
}

MatrixXd symmetric_sqrt(const MatrixXd& Q) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Q);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

double dare_residual(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                     const MatrixXd& R, const MatrixXd& P) {
  const MatrixXd btpa = B.transpose() * P * A;
  const MatrixXd s = R + B.transpose() * P * B;
  const MatrixXd res = A.transpose() * P * A - P - btpa.transpose() * s.ldlt().solve(btpa) + Q;
  return res.cwiseAbs().rowwise().sum().maxCoeff();
}

DareSolution solve_dare(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                        const MatrixXd& R) {
  const Index n = A.rows();
  const Index m = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m ||
      R.cols() != m) {
    throw ConfigError("solve_dare: inconsistent matrix dimensions");
  }
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, Q.cwiseAbs().maxCoeff())) {
    throw ConfigError("solve_dare: Q must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> qeig(Q);
  if (qeig.eigenvalues().minCoeff() < -1e-12) throw ConfigError("solve_dare: Q must be PSD");
  Eigen::LLT<MatrixXd> rllt(R);
  if (rllt.info() != Eigen::Success) throw ConfigError("solve_dare: R must be positive definite");
  if (!is_stabilizable(A, B)) throw ModelError("solve_dare: (A, B) is not stabilizable");
  if (!is_observable(symmetric_sqrt(Q), A)) {
    throw ModelError("solve_dare: (Q^{1/2}, A) is not observable");
  }

  DareSolution sol;
  MatrixXd P = Q;
  for (int it = 1; it <= kDareMaxIterations; ++it) {
    const MatrixXd btpa = B.transpose() * P * A;
    const MatrixXd s = R + B.transpose() * P * B;
    MatrixXd next = A.transpose() * P * A - btpa.transpose() * s.llt().solve(btpa) + Q;
    next = 0.5 * (next + next.transpose()).eval();
    const double step = (next - P).cwiseAbs().maxCoeff();
    P = std::move(next);
    if (step <= kDareStepTol * std::max(1.0, P.cwiseAbs().maxCoeff())) {
      sol.iterations = it;
      break;
    }
    if (it == kDareMaxIterations) {
      throw ModelError("solve_dare: Riccati recursion did not converge in 1e5 iterations");
    }
  }

  const MatrixXd s = R + B.transpose() * P * B;
  sol.K = -s.llt().solve(B.transpose() * P * A);
  sol.P = P;
  sol.residual = dare_residual(A, B, Q, R, P);
  if (sol.residual > kDareResidualTol) {
    std::ostringstream msg;
    msg << "solve_dare: residual " << sol.residual << " exceeds 1e-8";
    throw ModelError(msg.str());
  }
  Eigen::LLT<MatrixXd> pllt(P);
  if (pllt.info() != Eigen::Success) throw ModelError("solve_dare: P is not positive definite");
  if (spectral_radius(A + B * sol.K) >= 1.0) {
    throw ModelError("solve_dare: closed loop A + BK is not Schur stable");
  }
  return sol;
}

int controllability_index(const MatrixXd& A, const MatrixXd& B) {
  const Index n = A.rows();
  MatrixXd krylov(n, 0);
  MatrixXd block = B;
  for (Index k = 1; k <= n; ++k) {
    MatrixXd grown(n, krylov.cols() + B.cols());
    grown << krylov, block;
    krylov = std::move(grown);
    Eigen::FullPivLU<MatrixXd> lu(krylov);
    lu.setThreshold(1e-10);
    if (lu.rank() == n) return static_cast<int>(k);
    block = A * block;
  }
  throw ModelError("controllability_index: (A, B) is not controllable");
}

ExtendedDynamics extended_dynamics(const MatrixXd& A, const MatrixXd& B, const MatrixXd& K) {
  const Index n = A.rows();
  const Index m = B.cols();
  const MatrixXd gap = MatrixXd::Identity(n, n) - A;
  ExtendedDynamics ext;
  ext.psi = K * gap.fullPivLu().solve(B);
  ext.a_w = MatrixXd::Zero(n + m, n + m);
  ext.a_w.topLeftCorner(n, n) = A + B * K;
  ext.a_w.topRightCorner(n, m) = B * (MatrixXd::Identity(m, m) - ext.psi);
  ext.a_w.bottomRightCorner(m, m).setIdentity();
  return ext;
}

InputBox scale_box(const InputBox& V, double lambda) {
  const Input c = V.center();
  return InputBox{c + lambda * (V.lower - c), c + lambda * (V.upper - c)};
}

Polyhedron build_w_lambda(const MatrixXd& K, const MatrixXd& psi, const InputBox& V,
                          double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw ConfigError("lambda must lie in (0, 1): finite determination of the terminal set "
                      "requires lambda < 1");
  }
  if ((V.lower.array() > V.upper.array()).any()) throw ModelError("build_w_lambda: V is empty");
  const Index n = K.cols();
  const Index m = K.rows();
  if (m != 2 || psi.rows() != 2 || psi.cols() != 2) {
    throw ConfigError("build_w_lambda: expected a two-input system");
  }
  const InputBox scaled = scale_box(V, lambda);
  const MatrixXd input_map = MatrixXd::Identity(m, m) - psi;

  MatrixXd F = MatrixXd::Zero(4 * m, n + m);
  VectorXd g(4 * m);
  F.block(0, 0, m, n) = K;
  F.block(0, n, m, m) = input_map;
  g.segment(0, m) = V.upper;
  F.block(m, 0, m, n) = -K;
  F.block(m, n, m, m) = -input_map;
  g.segment(m, m) = -V.lower;
  F.block(2 * m, n, m, m).setIdentity();
  g.segment(2 * m, m) = scaled.upper;
  F.block(3 * m, n, m, m) = -MatrixXd::Identity(m, m);
  g.segment(3 * m, m) = -scaled.lower;
  return Polyhedron(std::move(F), std::move(g));
}

namespace {

// Scales each row to unit max-norm. Zero rows are dropped when trivially
// satisfied and reported as an empty set otherwise.
Polyhedron normalize_rows(const Polyhedron& P) {
  std::vector<Index> keep;
  MatrixXd F = P.F;
  VectorXd g = P.g;
  for (Index i = 0; i < P.rows(); ++i) {
    const double s = F.row(i).cwiseAbs().maxCoeff();
    if (s == 0.0) {
      if (g[i] < -kRedundancyTol) throw ModelError("constraint set is empty (0 <= negative)");
      continue;
    }
    F.row(i) /= s;
    g[i] /= s;
    keep.push_back(i);
  }
  return Polyhedron(F(keep, Eigen::all), g(keep));
}

}  // namespace

InvariantSet max_admissible_invariant_set(const MatrixXd& a_w, const Polyhedron& W,
                                          int max_iterations) {
  if (a_w.rows() != a_w.cols() || a_w.rows() != W.dim()) {
    throw ConfigError("max_admissible_invariant_set: dimension mismatch");
  }
  const Polyhedron base = normalize_rows(W);
  if (!is_feasible(base)) throw ModelError("max_admissible_invariant_set: W is empty");

  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (Index i = 0; i < base.rows(); ++i) {
    rows.emplace_back(base.F.row(i));
    rhs.push_back(base.g[i]);
  }
  auto current = [&] {
    MatrixXd F(static_cast<Index>(rows.size()), W.dim());
    VectorXd g(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      F.row(static_cast<Index>(i)) = rows[i];
      g[static_cast<Index>(i)] = rhs[i];
    }
    return Polyhedron(std::move(F), std::move(g));
  };

  MatrixXd propagated = base.F;
  for (int i = 0; i < max_iterations; ++i) {
    propagated = propagated * a_w;  // F A_w^{i+1}
    const Polyhedron set = current();
    bool all_redundant = true;
    for (Index r = 0; r < propagated.rows(); ++r) {
      Eigen::RowVectorXd row = propagated.row(r);
      double bound = base.g[r];
      const double s = row.cwiseAbs().maxCoeff();
      if (s == 0.0) {
        if (bound < -kRedundancyTol) throw ModelError("invariant set is empty");
        continue;
      }
      row /= s;
      bound /= s;
      const LpResult lp = lp_max(row.transpose(), set);
      if (lp.status == LpStatus::Infeasible) throw ModelError("invariant set became empty");
      if (lp.status == LpStatus::Optimal && lp.value <= bound + kRedundancyTol) continue;
      all_redundant = false;
      rows.push_back(row);
      rhs.push_back(bound);
    }
    if (all_redundant) {
      return InvariantSet{remove_redundant(set, kRedundancyTol), i};
    }
  }
  throw ModelError("finite determination failed; check lambda < 1");
}

TerminalIngredients compute_terminal_ingredients(const DiscreteDynamics& dyn, const MatrixXd& Q,
                                                 const MatrixXd& R, const InputBox& V,
                                                 double lambda) {
  const MatrixXd A = dyn.m.fast;
  const MatrixXd B = dyn.m.input;
  TerminalIngredients t;
  const DareSolution dare = solve_dare(A, B, Q, R);
  t.K = dare.K;
  t.P = dare.P;
  t.dare_iterations = dare.iterations;
  t.dare_residual = dare.residual;
  const ExtendedDynamics ext = extended_dynamics(A, B, t.K);
  t.psi = ext.psi;
  t.a_w = ext.a_w;
  t.lambda = lambda;
  t.w_lambda = build_w_lambda(t.K, t.psi, V, lambda);
  const InvariantSet inv = max_admissible_invariant_set(t.a_w, t.w_lambda);
  t.x_a = inv.set;
  t.determination_index = inv.determination_index;
  return t;
}

}  // namespace anesmpc
