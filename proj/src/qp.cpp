#include "anesmpc/qp.hpp"

#include "anesmpc/errors.hpp"
#include "anesmpc/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace anesmpc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* to_string(QpStatus status) {
  switch (status) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::Infeasible: return "infeasible";
    case QpStatus::MaxIterations: return "max_iter";
  }
  return "unknown";
}

double KktResiduals::max() const {
  return std::max({stationarity, primal_eq, primal_in, complementarity});
}

void QpProblem::validate() const {
  const Index n = H.rows();
  if (H.cols() != n || f.size() != n) throw ConfigError("qp: H/f size mismatch");
  if (A_eq.rows() != b_eq.size() || (A_eq.rows() > 0 && A_eq.cols() != n)) {
    throw ConfigError("qp: equality block size mismatch");
  }
  if (A_in.rows() != b_in.size() || (A_in.rows() > 0 && A_in.cols() != n)) {
    throw ConfigError("qp: inequality block size mismatch");
  }
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ConfigError("qp: H must be symmetric");
  }
}

double min_eigenvalue(const MatrixXd& H) {
  if (H.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

KktResiduals kkt_residuals(const QpProblem& p, const VectorXd& z, const VectorXd& y_eq,
                           const VectorXd& y_in) {
  KktResiduals r;
  VectorXd grad = p.H * z + p.f;
  if (p.A_eq.rows() > 0) grad += p.A_eq.transpose() * y_eq;
  if (p.A_in.rows() > 0) grad += p.A_in.transpose() * y_in;
  r.stationarity = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
  if (p.A_eq.rows() > 0) r.primal_eq = (p.A_eq * z - p.b_eq).cwiseAbs().maxCoeff();
  if (p.A_in.rows() > 0) {
    const VectorXd slack = p.b_in - p.A_in * z;
    r.primal_in = std::max(0.0, -slack.minCoeff());
    r.complementarity = (y_in.array() * slack.array()).abs().maxCoeff();
    r.complementarity = std::max(r.complementarity, std::max(0.0, -y_in.minCoeff()));
  }
  return r;
}

namespace {

bool is_feasible_point(const QpProblem& p, const VectorXd& z, double tol) {
  if (z.size() != p.num_variables() || !z.allFinite()) return false;
  if (p.A_eq.rows() > 0 && (p.A_eq * z - p.b_eq).cwiseAbs().maxCoeff() > tol) return false;
  if (p.A_in.rows() > 0 && (p.A_in * z - p.b_in).maxCoeff() > tol) return false;
  return true;
}

// Equality-constrained minimizer over the current working set with one step
// of iterative refinement. Returns (z, multipliers) stacked.
VectorXd solve_working_set(const MatrixXd& H, const VectorXd& f, const QpProblem& p,
                           const std::vector<Index>& work) {
  const Index n = H.rows();
  const Index me = p.A_eq.rows();
  const Index m = me + static_cast<Index>(work.size());
  MatrixXd kkt = MatrixXd::Zero(n + m, n + m);
  VectorXd rhs(n + m);
  kkt.topLeftCorner(n, n) = H;
  rhs.head(n) = -f;
  for (Index i = 0; i < me; ++i) {
    kkt.block(n + i, 0, 1, n) = p.A_eq.row(i);
    rhs[n + i] = p.b_eq[i];
  }
  for (std::size_t k = 0; k < work.size(); ++k) {
    const Index row = n + me + static_cast<Index>(k);
    kkt.block(row, 0, 1, n) = p.A_in.row(work[k]);
    rhs[row] = p.b_in[work[k]];
  }
  kkt.topRightCorner(n, m) = kkt.bottomLeftCorner(m, n).transpose();
  Eigen::PartialPivLU<MatrixXd> lu(kkt);
  VectorXd sol = lu.solve(rhs);
  sol += lu.solve(rhs - kkt * sol);
  return sol;
}

}  // namespace

QpSolution qp_solve(const QpProblem& p, const std::optional<VectorXd>& warm_start,
                    const QpSettings& settings) {
  p.validate();
  const Index n = p.num_variables();
  const Index me = p.A_eq.rows();
  const Index mi = p.A_in.rows();
  QpSolution out;

  MatrixXd H = p.H;
  if (min_eigenvalue(H) < settings.regularization_threshold) {
    H.diagonal().array() += settings.regularization;
    out.regularized = true;
  }

  VectorXd z;
  if (warm_start && is_feasible_point(p, *warm_start, settings.feasibility_tol)) {
    z = *warm_start;
  } else {
    MatrixXd F(2 * me + mi, n);
    VectorXd g(2 * me + mi);
    if (me > 0) {
      F.topRows(me) = p.A_eq;
      F.middleRows(me, me) = -p.A_eq;
      g.head(me) = p.b_eq;
      g.segment(me, me) = -p.b_eq;
    }
    if (mi > 0) {
      F.bottomRows(mi) = p.A_in;
      g.tail(mi) = p.b_in;
    }
    const LpResult lp = lp_max(VectorXd::Zero(n), Polyhedron(F, g));
    if (lp.status != LpStatus::Optimal) {
      out.status = QpStatus::Infeasible;
      out.certificate = lp.farkas;
      out.message = "constraints are infeasible";
      return out;
    }
    z = lp.argmax;
  }

  const int cap = settings.max_iterations > 0 ? settings.max_iterations
                                              : static_cast<int>(10 * (n + mi) + 100);
  std::vector<Index> work;
  std::vector<bool> in_work(static_cast<std::size_t>(mi), false);
  VectorXd mult = VectorXd::Zero(me);

  for (int it = 0; it < cap; ++it) {
    out.iterations = it + 1;
    const VectorXd sol = solve_working_set(H, p.f, p, work);
    const VectorXd target = sol.head(n);
    mult = sol.tail(sol.size() - n);
    const VectorXd step = target - z;

    double alpha = 1.0;
    Index blocking = -1;
    const double step_norm = step.cwiseAbs().maxCoeff();
    if (step_norm > 1e-14 * std::max(1.0, z.cwiseAbs().maxCoeff())) {
      for (Index i = 0; i < mi; ++i) {
        if (in_work[static_cast<std::size_t>(i)]) continue;
        const double rate = p.A_in.row(i).dot(step);
        if (rate <= 1e-14 * std::max(1.0, step_norm)) continue;
        const double slack = std::max(0.0, p.b_in[i] - p.A_in.row(i).dot(z));
        const double ratio = slack / rate;
        if (ratio < alpha) {
          alpha = ratio;
          blocking = i;
        }
      }
    }

    if (blocking >= 0) {
      z += alpha * step;
      work.push_back(blocking);
      in_work[static_cast<std::size_t>(blocking)] = true;
      continue;
    }

    z = target;
    // At the working-set minimizer: release the most negative inequality multiplier.
    Index drop = -1;
    double most_negative = -settings.multiplier_tol;
    for (std::size_t k = 0; k < work.size(); ++k) {
      const double y = mult[me + static_cast<Index>(k)];
      if (y < most_negative) {
        most_negative = y;
        drop = static_cast<Index>(k);
      }
    }
    if (drop < 0) {
      out.status = QpStatus::Optimal;
      break;
    }
    in_work[static_cast<std::size_t>(work[static_cast<std::size_t>(drop)])] = false;
    work.erase(work.begin() + drop);
  }

  out.z = z;
  out.y_eq = mult.head(me);
  out.y_in = VectorXd::Zero(mi);
  for (std::size_t k = 0; k < work.size() && me + static_cast<Index>(k) < mult.size(); ++k) {
    out.y_in[work[k]] = std::max(0.0, mult[me + static_cast<Index>(k)]);
  }
  out.objective = p.objective(z);
  out.kkt = kkt_residuals(p, z, out.y_eq, out.y_in);
  if (out.status != QpStatus::Optimal) {
    out.status = QpStatus::MaxIterations;
    out.message = "active-set iteration cap reached; max KKT residual " +
                  std::to_string(out.kkt.max());
  }
  return out;
}

}  // namespace anesmpc
