#include "anesmpc/mpc.hpp"

#include "anesmpc/errors.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

namespace anesmpc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void MpcConfig::validate() const {
  if (horizon < 1) throw ConfigError("N must be >= 1");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 0.0) throw ConfigError("Q must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix4> qe(Q);
  if (qe.eigenvalues().minCoeff() < 0.0) throw ConfigError("Q must be positive semidefinite");
  Eigen::LLT<Eigen::Matrix2d> rl(R);
  if (rl.info() != Eigen::Success) throw ConfigError("R must be positive definite");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw ConfigError("lambda must lie in (0, 1): finite determination of the terminal set "
                      "requires lambda < 1");
  }
  if (!(offset_cost.weight >= 0.0)) throw ConfigError("vd weight must be >= 0");
}

SteadyInputSet build_steady_input_set(const SteadyOutputRow& row, const InputBox& V,
                                      double epsilon) {
  SteadyInputSet zs;
  zs.gain = row.gain;
  zs.level = row.level;
  zs.lower = V.lower.array() + epsilon;
  zs.upper = V.upper.array() - epsilon;
  steady_segment(zs);  // throws when empty
  return zs;
}

std::pair<Input, Input> steady_segment(const SteadyInputSet& zs) {
  const Input g = zs.gain.transpose();
  const double gg = g.squaredNorm();
  if (gg == 0.0) throw ModelError("steady output gain is zero");
  // Parametrize the line as p0 + t d and clip against the box.
  const Input p0 = g * (zs.level / gg);
  const Input d = Input(-g[1], g[0]) / std::sqrt(gg);
  double t_lo = -std::numeric_limits<double>::infinity();
  double t_hi = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 2; ++i) {
    if (zs.lower[i] > zs.upper[i]) throw ModelError("no admissible steady input for y_ref");
    if (std::abs(d[i]) < 1e-300) {
      if (p0[i] < zs.lower[i] || p0[i] > zs.upper[i]) {
        throw ModelError("no admissible steady input for y_ref");
      }
      continue;
    }
    double a = (zs.lower[i] - p0[i]) / d[i];
    double b = (zs.upper[i] - p0[i]) / d[i];
    if (a > b) std::swap(a, b);
    t_lo = std::max(t_lo, a);
    t_hi = std::min(t_hi, b);
  }
  if (t_lo > t_hi) throw ModelError("no admissible steady input for y_ref");
  return {p0 + t_lo * d, p0 + t_hi * d};
}

Controller::Controller(ControllerIngredients ingredients) : ing_(std::move(ingredients)) {
  const MpcConfig& cfg = ing_.config;
  cfg.validate();
  const MatrixXd A = ing_.dynamics.m.fast;
  const MatrixXd B = ing_.dynamics.m.input;
  ctrb_index_ = anesmpc::controllability_index(A, B);
  if (cfg.horizon < ctrb_index_) {
    throw ConfigError("N = " + std::to_string(cfg.horizon) +
                      " is below the controllability index " + std::to_string(ctrb_index_));
  }
  steady_segment(ing_.steady);
  steady_map_ = steady_state_map(ing_.dynamics);
  if (ing_.terminal.x_a.dim() != 6) throw ConfigError("terminal set must live in R^6");

  const int N = cfg.horizon;
  const Index nz = 2 * N + 2;
  const MatrixXd Q = cfg.Q;
  const MatrixXd R = cfg.R;
  const MatrixXd& P = ing_.terminal.P;

  auto select_input = [&](int k) {
    MatrixXd E = MatrixXd::Zero(2, nz);
    E.block(0, 2 * k, 2, 2).setIdentity();
    return E;
  };
  const MatrixXd Ea = select_input(N);
  const MatrixXd S = steady_map_;

  state_powers_.assign(static_cast<std::size_t>(N + 1), MatrixXd());
  input_maps_.assign(static_cast<std::size_t>(N + 1), MatrixXd());
  state_powers_[0] = MatrixXd::Identity(4, 4);
  input_maps_[0] = MatrixXd::Zero(4, nz);
  for (int k = 0; k < N; ++k) {
    state_powers_[k + 1] = A * state_powers_[k];
    input_maps_[k + 1] = A * input_maps_[k] + B * select_input(k);
  }

  MatrixXd H = MatrixXd::Zero(nz, nz);
  f_state_ = MatrixXd::Zero(nz, 4);
  cost_state_ = MatrixXd::Zero(4, 4);
  for (int k = 0; k <= N; ++k) {
    const MatrixXd& W = (k < N) ? Q : P;
    const MatrixXd M = input_maps_[k] - S * Ea;  // x_k - x_a in z
    H += 2.0 * M.transpose() * W * M;
    f_state_ += 2.0 * M.transpose() * W * state_powers_[k];
    cost_state_ += state_powers_[k].transpose() * W * state_powers_[k];
    if (k < N) {
      const MatrixXd L = select_input(k) - Ea;  // v_k - v_a
      H += 2.0 * L.transpose() * R * L;
    }
  }
  const OffsetCost& vd = cfg.offset_cost;
  const VectorXd da = Ea.transpose() * vd.direction;
  H += 2.0 * vd.weight * da * da.transpose();
  base_.H = 0.5 * (H + H.transpose());
  base_.f = Ea.transpose() * (vd.linear - 2.0 * vd.weight * vd.offset * vd.direction);
  cost_offset_ = vd.weight * vd.offset * vd.offset;

  base_.A_eq = ing_.steady.gain * Ea;
  base_.b_eq = VectorXd::Constant(1, ing_.steady.level);

  const Polyhedron& xa = ing_.terminal.x_a;
  const MatrixXd Fx = xa.F.leftCols(4);
  const MatrixXd Fv = xa.F.rightCols(2);
  const Index box_rows = 4 * N + 4;
  base_.A_in = MatrixXd::Zero(box_rows + xa.rows(), nz);
  base_.b_in = VectorXd::Zero(box_rows + xa.rows());
  for (int k = 0; k < N; ++k) {
    const MatrixXd E = select_input(k);
    base_.A_in.middleRows(4 * k, 2) = E;
    base_.b_in.segment(4 * k, 2) = ing_.tracking_box.upper;
    base_.A_in.middleRows(4 * k + 2, 2) = -E;
    base_.b_in.segment(4 * k + 2, 2) = -ing_.tracking_box.lower;
  }
  base_.A_in.middleRows(4 * N, 2) = Ea;
  base_.b_in.segment(4 * N, 2) = ing_.steady.upper;
  base_.A_in.middleRows(4 * N + 2, 2) = -Ea;
  base_.b_in.segment(4 * N + 2, 2) = -ing_.steady.lower;
  base_.A_in.bottomRows(xa.rows()) = Fx * input_maps_[N] + Fv * Ea;
  base_.b_in.tail(xa.rows()) = xa.g;
  terminal_state_ = Fx * state_powers_[N];
  base_.validate();
}

QpProblem Controller::problem_for(const FastState& x0) const {
  QpProblem p = base_;
  p.f += f_state_ * x0;
  p.b_in.tail(terminal_state_.rows()) -= terminal_state_ * x0;
  return p;
}

double Controller::cost_constant(const FastState& x0) const {
  return x0.dot(cost_state_ * x0) + cost_offset_;
}

double Controller::rollout_cost(const FastState& x0, const VectorXd& z) const {
  const int N = horizon();
  const Input va = z.tail<2>();
  const FastState xa = steady_map_ * va;
  const Matrix4& A = ing_.dynamics.m.fast;
  const Matrix42& B = ing_.dynamics.m.input;
  FastState x = x0;
  double cost = 0.0;
  for (int k = 0; k < N; ++k) {
    const Input v = z.segment<2>(2 * k);
    cost += (x - xa).dot(ing_.config.Q * (x - xa)) + (v - va).dot(ing_.config.R * (v - va));
    x = A * x + B * v;
  }
  cost += (x - xa).dot(ing_.terminal.P * (x - xa));
  return cost + ing_.config.offset_cost(va);
}

std::optional<VectorXd> Controller::shifted_warm_start() const {
  if (!previous_) return std::nullopt;
  const int N = horizon();
  const VectorXd& z = previous_->z;
  VectorXd next(z.size());
  next.head(2 * (N - 1)) = z.segment(2, 2 * (N - 1));
  const Input va = z.tail<2>();
  const FastState xa = steady_map_ * va;
  next.segment<2>(2 * (N - 1)) = ing_.terminal.K * (previous_->terminal_state - xa) + va;
  next.tail<2>() = va;
  return next;
}

namespace {

std::string describe_certificate(const VectorXd& y, Index n_eq, int N, Index n_terminal) {
  // Stacked rows: [A_eq; -A_eq; A_in] with A_in = [input box (4N); v_a box (4); terminal].
  std::ostringstream os;
  os << "violated constraint groups:";
  bool any = false;
  auto weight = [&](Index from, Index count) {
    return count > 0 ? y.segment(from, count).sum() : 0.0;
  };
  const double tol = 1e-12;
  if (y.size() == 0) return "no certificate available";
  if (weight(0, 2 * n_eq) > tol) { os << " steady-output equality;"; any = true; }
  const Index in0 = 2 * n_eq;
  for (int k = 0; k < N; ++k) {
    if (weight(in0 + 4 * k, 4) > tol) { os << " input box at k=" << k << ";"; any = true; }
  }
  if (weight(in0 + 4 * N, 4) > tol) { os << " steady input bounds;"; any = true; }
  if (weight(in0 + 4 * N + 4, n_terminal) > tol) { os << " terminal set;"; any = true; }
  if (!any) os << " (none identified)";
  return os.str();
}

}  // namespace

ControlOutput Controller::step(const FastState& xf, const SlowState& xs) {
  if (!xf.allFinite() || !xs.allFinite()) throw ModelError("control_step: non-finite state");
  const QpProblem qp = problem_for(xf);
  const auto warm = shifted_warm_start();

  const auto t0 = std::chrono::steady_clock::now();
  const QpSolution sol = qp_solve(qp, warm);
  const auto t1 = std::chrono::steady_clock::now();

  if (sol.status == QpStatus::Infeasible) {
    previous_.reset();
    throw InfeasibleError("MPC problem infeasible; " +
                          describe_certificate(sol.certificate, qp.A_eq.rows(), horizon(),
                                               num_terminal_rows()));
  }
  if (sol.status != QpStatus::Optimal) {
    previous_.reset();
    throw ModelError("MPC QP did not converge: " + sol.message);
  }

  const int N = horizon();
  ControlOutput out;
  out.solver_status = sol.status;
  out.kkt = sol.kkt;
  out.qp_iterations = sol.iterations;
  out.solve_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  out.v0 = sol.z.head<2>();
  out.v_a = sol.z.tail<2>();
  out.x_a = steady_map_ * out.v_a;
  out.cost = sol.objective + cost_constant(xf);
  out.predicted_xf.reserve(static_cast<std::size_t>(N + 1));
  for (int k = 0; k <= N; ++k) {
    out.predicted_xf.emplace_back(state_powers_[static_cast<std::size_t>(k)] * xf +
                                  input_maps_[static_cast<std::size_t>(k)] * sol.z);
  }

  const Input raw = out.v0 + ing_.compensation * xs;
  out.u = raw.cwiseMax(ing_.applied_box.lower).cwiseMin(ing_.applied_box.upper);
  if ((out.u - raw).cwiseAbs().maxCoeff() > 0.0) {
    out.clamped = true;
    std::clog << "anesmpc: warning: applied input clamped to U (raw " << raw.transpose()
              << ")\n";
  }
  previous_ = Previous{sol.z, out.predicted_xf.back()};
  return out;
}

}  // namespace anesmpc
