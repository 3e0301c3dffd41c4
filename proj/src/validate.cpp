#include "anesmpc/validate.hpp"

#include "anesmpc/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace anesmpc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

ClosedLoopTrace trace_closed_loop(const ControlSetup& setup, Controller& ctrl, double duration) {
  ClosedLoopTrace tr;
  const DiscreteDynamics& dyn = setup.plant.discrete;
  const long steps = std::lround(duration / dyn.ts);
  tr.log.ts = dyn.ts;
  FastState xf = FastState::Zero();
  SlowState xs = SlowState::Zero();
  FastState nominal = FastState::Zero();
  ctrl.reset();
  for (long k = 0; k < steps; ++k) {
    ControlOutput out;
    try {
      out = ctrl.step(xf, xs);
    } catch (const InfeasibleError& e) {
      tr.infeasible_step = k;
      tr.error = e.what();
      return tr;
    }
    SimRecord rec;
    rec.t = static_cast<double>(k) * dyn.ts;
    rec.bis = bis_output(xf, setup.plant.pd);
    rec.u = out.u;
    rec.v = out.v0;
    rec.v_a = out.v_a;
    rec.xf = xf;
    rec.xs = xs;
    rec.x_a = out.x_a;
    rec.status = to_string(out.solver_status);
    rec.solve_ms = out.solve_ms;
    rec.cost = out.cost;
    rec.clamped = out.clamped;
    tr.log.records.push_back(rec);
    tr.outputs.push_back(out);
    tr.nominal_xf.push_back(nominal);
    tr.max_divergence = std::max(tr.max_divergence, (xf - nominal).cwiseAbs().maxCoeff());
    if ((xf.array() < 0.0).any() || (xs.array() < 0.0).any()) tr.nonnegative = false;

    step_full(dyn, xf, xs, out.u);
    nominal = dyn.m.fast * nominal + dyn.m.input * out.v0;
  }
  return tr;
}

EnumeratedQp enumerate_active_sets(const QpProblem& p, double tol) {
  const Index n = p.num_variables();
  const Index me = p.A_eq.rows();
  const Index q = p.A_in.rows();
  if (q > 20) throw ConfigError("enumerate_active_sets: too many inequality rows");
  EnumeratedQp best;
  best.objective = std::numeric_limits<double>::infinity();
  for (unsigned long mask = 0; mask < (1UL << q); ++mask) {
    std::vector<Index> act;
    for (Index i = 0; i < q; ++i)
      if (mask & (1UL << i)) act.push_back(i);
    const Index m = me + static_cast<Index>(act.size());
    if (m > n) continue;
    MatrixXd A(m, n);
    VectorXd b(m);
    A.topRows(me) = p.A_eq;
    b.head(me) = p.b_eq;
    for (std::size_t j = 0; j < act.size(); ++j) {
      A.row(me + static_cast<Index>(j)) = p.A_in.row(act[j]);
      b[me + static_cast<Index>(j)] = p.b_in[act[j]];
    }
    MatrixXd kkt = MatrixXd::Zero(n + m, n + m);
    kkt.topLeftCorner(n, n) = p.H;
    kkt.topRightCorner(n, m) = A.transpose();
    kkt.bottomLeftCorner(m, n) = A;
    VectorXd rhs(n + m);
    rhs << -p.f, b;
    Eigen::FullPivLU<MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    const VectorXd z = lu.solve(rhs).head(n);
    if (me > 0 && ((p.A_eq * z - p.b_eq).cwiseAbs().array() > tol).any()) continue;
    if (q > 0 && ((p.A_in * z - p.b_in).array() > tol).any()) continue;
    const double obj = p.objective(z);
    if (obj < best.objective) {
      best.feasible = true;
      best.z = z;
      best.objective = obj;
    }
  }
  return best;
}

QpProblem random_convex_qp(int n, int q, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto gauss = [&](Index r, Index c) {
    MatrixXd m(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) m(i, j) = normal(rng);
    return m;
  };
  QpProblem p;
  const MatrixXd M = gauss(n, n);
  p.H = M.transpose() * M + 0.1 * MatrixXd::Identity(n, n);
  p.f = gauss(n, 1).col(0) * 3.0;
  p.A_eq.resize(0, n);
  p.b_eq.resize(0);
  p.A_in = gauss(q, n);
  const VectorXd z0 = gauss(n, 1).col(0);
  p.b_in = p.A_in * z0;
  for (Index i = 0; i < q; ++i) p.b_in[i] += unit(rng);
  return p;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << v;
  return os.str();
}

double cross_block_max(const MatrixXd& m) {
  // 2x2-block structure on 4x4, 4x2 or 2x4 matrices: (0..1) vs (2..3).
  const Index rh = m.rows() / 2;
  const Index ch = m.cols() / 2;
  return std::max(m.topRightCorner(rh, m.cols() - ch).cwiseAbs().maxCoeff(),
                  m.bottomLeftCorner(m.rows() - rh, ch).cwiseAbs().maxCoeff());
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

class Runner {
 public:
  explicit Runner(ValidationReport& r) : report_(r) {}

  // body returns (passed, detail); exceptions turn into a failure.
  void operator()(const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
    CheckResult c;
    c.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      auto [ok, detail] = body();
      c.passed = ok;
      c.detail = std::move(detail);
    } catch (const std::exception& e) {
      c.passed = false;
      c.detail = std::string("error: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report_.checks.push_back(std::move(c));
  }

 private:
  ValidationReport& report_;
};

}  // namespace

ValidationReport run_validation(const ControlSetup& base, const ValidationOptions& opt) {
  ControlSetup setup = base;
  if (opt.flip_compensation) setup.compensation = -setup.compensation;
  const DiscreteDynamics& dyn = setup.plant.discrete;
  const DynamicsMatrices& m = dyn.m;
  const TerminalIngredients& term = setup.terminal;
  ValidationReport report;
  Runner run(report);
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  run("block-structure", [&] {
    double worst = 0.0;
    const DynamicsMatrices* sets[] = {&setup.plant.continuous.m, &m};
    for (const DynamicsMatrices* dm : sets) {
      const std::vector<MatrixXd> mats = {dm->fast, dm->slow_on_fast, dm->slow, dm->fast_on_slow, dm->input};
      for (const MatrixXd& x : mats) worst = std::max(worst, cross_block_max(x));
    }
    return std::pair{worst == 0.0, "max cross-drug entry " + fmt(worst)};
  });

  run("equilibrium-invariance", [&] {
    const Matrix4 a = setup.plant.continuous.m.fast;
    const Matrix42 cont = (-a).fullPivLu().solve(setup.plant.continuous.m.input);
    double worst = 0.0;
    for (double ts : {1.0, dyn.ts, 10.0}) {
      try {
        const DiscreteDynamics d = discretize_euler(setup.plant.continuous, ts);
        const Matrix42 s = steady_state_map(d);
        worst = std::max(worst, (s - cont).cwiseAbs().maxCoeff() / cont.cwiseAbs().maxCoeff());
      } catch (const ModelError&) {
        // Ts outside the Euler-stable range for this patient
      }
    }
    return std::pair{worst <= 1e-12, "max relative deviation " + fmt(worst)};
  });

  run("hill-roundtrip", [&] {
    double worst = 0.0;
    for (int i = 0; i < opt.random_trials; ++i) {
      PdParams pd;
      pd.E0 = 80.0 + 20.0 * unit(rng);
      pd.Emax = pd.E0 * (0.5 + 0.5 * unit(rng));
      pd.gamma = 0.5 + 4.0 * unit(rng);
      pd.Ce50p = 1.0 + 6.0 * unit(rng);
      pd.Ce50r = 5.0 + 20.0 * unit(rng);
      const double lo = pd.E0 - pd.Emax;
      const double y = lo + (pd.E0 - lo) * (0.02 + 0.96 * unit(rng));
      const double c = hill_invert(y, pd);
      const double share = unit(rng);
      FastState xf = FastState::Zero();
      xf[kP4] = share * c * pd.Ce50p;
      xf[kR4] = (1.0 - share) * c * pd.Ce50r;
      worst = std::max(worst, std::abs(bis_output(xf, pd) - y));
    }
    return std::pair{worst <= 1e-10, "max |bis(invert(y)) - y| " + fmt(worst)};
  });

  run("compensation-cancellation", [&] {
    double worst = 0.0;
    const Matrix24& D = setup.compensation;
    for (int i = 0; i < opt.random_trials; ++i) {
      FastState xf, nominal;
      SlowState xs;
      Input v;
      for (int j = 0; j < 4; ++j) xf[j] = 10.0 * unit(rng);
      for (int j = 0; j < 4; ++j) xs[j] = 10.0 * unit(rng);
      v << 6.0 * unit(rng), 15.0 * unit(rng);
      nominal = m.fast * xf + m.input * v;
      const Input u = v + D * xs;
      step_full(dyn, xf, xs, u);
      worst = std::max(worst, (xf - nominal).cwiseAbs().maxCoeff());
    }
    return std::pair{worst <= 1e-12, "max one-step deviation " + fmt(worst)};
  });

  run("dare-quality", [&] {
    const double res = dare_residual(m.fast, m.input, setup.config.mpc.Q, setup.config.mpc.R, term.P);
    const bool spd = Eigen::LLT<MatrixXd>(term.P).info() == Eigen::Success;
    const double rho = spectral_radius(MatrixXd(m.fast) + MatrixXd(m.input) * term.K);
    const double cross = std::max(cross_block_max(term.P), cross_block_max(term.K));
    const bool ok = res <= 1e-8 && spd && rho < 1.0 && cross <= 1e-10;
    return std::pair{ok, "residual " + fmt(res) + ", rho " + fmt(rho) + ", cross " + fmt(cross) +
                             (spd ? "" : ", P not SPD")};
  });

  run("extended-dynamics", [&] {
    const Eigen::EigenSolver<MatrixXd> es(term.a_w);
    int unit_count = 0;
    for (Index i = 0; i < es.eigenvalues().size(); ++i)
      if (std::abs(es.eigenvalues()[i] - 1.0) <= 1e-9) ++unit_count;
    const bool blocks = term.a_w.bottomLeftCorner(2, 4).isZero(0.0) &&
                        term.a_w.bottomRightCorner(2, 2).isIdentity(0.0);
    return std::pair{unit_count == 2 && blocks,
                     std::to_string(unit_count) + " unit eigenvalues" + (blocks ? "" : ", bad blocks")};
  });

  run("invariant-set-sampling", [&] {
    const Polyhedron& X = term.x_a;
    const InputBox V = setup.tracking_box;
    VectorXd start(6);
    const Input vc = V.center();
    start << steady_state_map(dyn) * vc, vc;
    std::mt19937_64 sampler(opt.seed + 1);
    const auto samples = hit_and_run(X, start, opt.invariance_samples, sampler);
    long violations = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (VectorXd w : samples) {
      for (int s = 0; s <= opt.invariance_steps; ++s) {
        const double a = (X.F * w - X.g).maxCoeff();
        const double b = (term.w_lambda.F * w - term.w_lambda.g).maxCoeff();
        worst = std::max({worst, a, b});
        if (a > 1e-8 || b > 1e-8) {
          ++violations;
          break;
        }
        w = term.a_w * w;
      }
    }
    return std::pair{violations == 0 && static_cast<int>(samples.size()) == opt.invariance_samples,
                     std::to_string(samples.size()) + " samples, k* " +
                         std::to_string(term.determination_index) + ", worst slack " + fmt(worst)};
  });

  run("qp-oracle", [&] {
    double worst_z = 0.0, worst_kkt = 0.0;
    int mismatches = 0;
    std::uniform_int_distribution<int> dn(1, 6), dq(0, 3);
    for (int i = 0; i < opt.random_trials; ++i) {
      const QpProblem p = random_convex_qp(dn(rng), dq(rng), opt.seed + 1000 + static_cast<std::uint64_t>(i));
      const EnumeratedQp ref = enumerate_active_sets(p);
      const QpSolution sol = qp_solve(p);
      if (!ref.feasible || sol.status != QpStatus::Optimal) {
        ++mismatches;
        continue;
      }
      const double dz = (sol.z - ref.z).cwiseAbs().maxCoeff();
      worst_z = std::max(worst_z, dz);
      worst_kkt = std::max(worst_kkt, sol.kkt.max());
      if (dz > 1e-6 || sol.kkt.max() > 1e-8) ++mismatches;
    }
    return std::pair{mismatches == 0, std::to_string(mismatches) + " mismatches, max |dz| " +
                                          fmt(worst_z) + ", max kkt " + fmt(worst_kkt)};
  });

  // Closed-loop properties share one run.
  Controller ctrl = setup.make_controller();
  const ClosedLoopTrace tr = trace_closed_loop(setup, ctrl, setup.config.duration);
  const bool completed = tr.infeasible_step < 0;
  const std::string incomplete = "closed loop stopped at step " + std::to_string(tr.infeasible_step) +
                                 ": " + tr.error;

  run("recursive-feasibility", [&] {
    long bad = 0;
    for (const auto& o : tr.outputs)
      if (o.solver_status != QpStatus::Optimal) ++bad;
    if (!completed) return std::pair{false, incomplete};
    return std::pair{bad == 0, std::to_string(tr.outputs.size()) + " solves, " + std::to_string(bad) +
                                   " not optimal"};
  });

  run("lyapunov-descent", [&] {
    if (!completed) return std::pair{false, incomplete};
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t at = 0;
    for (std::size_t k = 1; k < tr.outputs.size(); ++k) {
      const double rise = tr.outputs[k].cost - tr.outputs[k - 1].cost;
      if (rise > worst) {
        worst = rise;
        at = k;
      }
    }
    return std::pair{worst <= 1e-8, "max cost increase " + fmt(worst) + " at step " + std::to_string(at)};
  });

  run("steady-consistency", [&] {
    if (!completed) return std::pair{false, incomplete};
    const Eigen::PartialPivLU<Matrix4> lu(Matrix4::Identity() - m.fast);
    double eq = 0.0, xa = 0.0;
    for (const auto& o : tr.outputs) {
      eq = std::max(eq, std::abs(setup.steady.gain.dot(o.v_a) - setup.steady.level));
      const FastState ref = lu.solve(m.input * o.v_a);
      xa = std::max(xa, (o.x_a - ref).cwiseAbs().maxCoeff() / std::max(1.0, ref.cwiseAbs().maxCoeff()));
    }
    return std::pair{eq <= 1e-8 && xa <= 1e-10,
                     "steady line residual " + fmt(eq) + ", x_a map deviation " + fmt(xa)};
  });

  run("terminal-membership", [&] {
    if (!completed) return std::pair{false, incomplete};
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& o : tr.outputs) {
      VectorXd w(6);
      w << o.predicted_xf.back(), o.v_a;
      worst = std::max(worst, (term.x_a.F * w - term.x_a.g).maxCoeff());
    }
    return std::pair{worst <= 1e-8, "max terminal row violation " + fmt(worst)};
  });

  run("compensation-equivalence", [&] {
    if (!completed) return std::pair{false, incomplete};
    return std::pair{tr.max_divergence <= 1e-9, "max |x_f - nominal| " + fmt(tr.max_divergence)};
  });

  run("input-admissibility", [&] {
    if (!completed) return std::pair{false, incomplete};
    long clamped = 0, outside_v = 0, mismatch = 0;
    for (std::size_t k = 0; k < tr.outputs.size(); ++k) {
      const auto& o = tr.outputs[k];
      if (o.clamped) ++clamped;
      if (!setup.tracking_box.contains(o.v0, 1e-9)) ++outside_v;
      const Input expect = o.v0 + setup.compensation * tr.log.records[k].xs;
      if (!o.clamped && (o.u - expect).cwiseAbs().maxCoeff() > 1e-12) ++mismatch;
    }
    const bool ok = clamped == 0 && outside_v == 0 && mismatch == 0 && tr.nonnegative;
    return std::pair{ok, std::to_string(clamped) + " clamped, " + std::to_string(outside_v) +
                             " v outside V, " + std::to_string(mismatch) + " u != v + D x_s" +
                             (tr.nonnegative ? "" : ", negative state")};
  });

  run("solve-time", [&] {
    if (!completed) return std::pair{false, incomplete};
    std::vector<double> ms;
    for (const auto& o : tr.outputs) ms.push_back(o.solve_ms);
    const double med = median(ms);
    return std::pair{med <= 50.0, "median " + fmt(med) + " ms"};
  });

  return report;
}

void print_report(std::ostream& os, const ValidationReport& report) {
  std::size_t width = 5;
  for (const auto& c : report.checks) width = std::max(width, c.name.size());
  os << std::left << std::setw(static_cast<int>(width)) << "check" << "  result  detail\n";
  for (const auto& c : report.checks) {
    os << std::left << std::setw(static_cast<int>(width)) << c.name << "  "
       << (c.passed ? "PASS  " : "FAIL  ") << "  " << c.detail << '\n';
  }
  std::size_t failed = 0;
  for (const auto& c : report.checks) failed += c.passed ? 0 : 1;
  os << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed") << '\n';
}

}  // namespace anesmpc
