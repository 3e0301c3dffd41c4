#include "anesmpc/pkpd_model.hpp"

#include "anesmpc/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <string>

namespace anesmpc {
namespace {

void require_positive(double value, std::string_view scope, const char* field) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << scope << "." << field << " must be strictly positive (got " << value << ")";
    throw ConfigError(msg.str());
  }
}

// Writes one drug's 2x2 blocks at offset 2*drug.
void fill_drug_blocks(DynamicsMatrices& m, const DrugPkParams& p, int drug) {
  const double k10 = p.Cl1 / p.V1;
  const double k12 = p.Cl2 / p.V1;
  const double k13 = p.Cl3 / p.V1;
  const double k21 = p.Cl2 / p.V2;
  const double k31 = p.Cl3 / p.V3;
  const int o = 2 * drug;

  m.fast(o, o) = -(k10 + k12 + k13);
  m.fast(o + 1, o) = p.ke;
  m.fast(o + 1, o + 1) = -p.ke;

  m.input(o, drug) = 1.0 / p.V1;

  // Blood receives the return flows from muscle (x2) and fat (x3).
  m.slow_on_fast(o, o) = k12;
  m.slow_on_fast(o, o + 1) = k13;

  m.fast_on_slow(o, o) = k21;
  m.fast_on_slow(o + 1, o) = k31;

  m.slow(o, o) = -k21;
  m.slow(o + 1, o + 1) = -k31;
}

}  // namespace

void DrugPkParams::validate(std::string_view drug) const {
  require_positive(V1, drug, "V1");
  require_positive(V2, drug, "V2");
  require_positive(V3, drug, "V3");
  require_positive(Cl1, drug, "Cl1");
  require_positive(Cl2, drug, "Cl2");
  require_positive(Cl3, drug, "Cl3");
  require_positive(ke, drug, "ke");
}

void PdParams::validate() const {
  if (!(E0 > 0.0 && E0 <= 100.0)) {
    std::ostringstream msg;
    msg << "pd.E0 must lie in (0, 100] (got " << E0 << ")";
    throw ConfigError(msg.str());
  }
  require_positive(Emax, "pd", "Emax");
  require_positive(gamma, "pd", "gamma");
  require_positive(Ce50p, "pd", "Ce50p");
  require_positive(Ce50r, "pd", "Ce50r");
}

Matrix8 DynamicsMatrices::full_state_matrix() const {
  Matrix8 a;
  a << fast, slow_on_fast, fast_on_slow, slow;
  return a;
}

Matrix82 DynamicsMatrices::full_input_matrix() const {
  Matrix82 b = Matrix82::Zero();
  b.topRows<4>() = input;
  return b;
}

ContinuousDynamics build_continuous(const DrugPkParams& propofol,
                                    const DrugPkParams& remifentanil) {
  propofol.validate("propofol");
  remifentanil.validate("remifentanil");
  ContinuousDynamics cont;
  fill_drug_blocks(cont.m, propofol, 0);
  fill_drug_blocks(cont.m, remifentanil, 1);
  return cont;
}

double spectral_radius(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

DiscreteDynamics discretize_euler(const ContinuousDynamics& cont, double ts) {
  if (!(ts > 0.0) || !std::isfinite(ts)) {
    throw ConfigError("sampling period Ts must be strictly positive");
  }
  DiscreteDynamics d;
  d.ts = ts;
  d.m.fast = Matrix4::Identity() + ts * cont.m.fast;
  d.m.slow = Matrix4::Identity() + ts * cont.m.slow;
  d.m.slow_on_fast = ts * cont.m.slow_on_fast;
  d.m.fast_on_slow = ts * cont.m.fast_on_slow;
  d.m.input = ts * cont.m.input;

  const double rho = spectral_radius(d.m.fast);
  if (d.m.fast.minCoeff() < 0.0 || rho >= 1.0) {
    std::ostringstream msg;
    msg << "Euler discretization at Ts = " << ts
        << " s is not a stable positive system (spectral radius " << rho
        << ", min entry " << d.m.fast.minCoeff() << ")";
    throw ModelError(msg.str());
  }
  return d;
}

void step_full(const DiscreteDynamics& dyn, FastState& xf, SlowState& xs,
               const Input& u) {
  const FastState next_f = dyn.m.fast * xf + dyn.m.input * u + dyn.m.slow_on_fast * xs;
  const SlowState next_s = dyn.m.slow * xs + dyn.m.fast_on_slow * xf;
  xf = next_f;
  xs = next_s;
}

Eigen::RowVector4d effect_row(const PdParams& pd) {
  return Eigen::RowVector4d(0.0, 1.0 / pd.Ce50p, 0.0, 1.0 / pd.Ce50r);
}

double bis_output(const FastState& xf, const PdParams& pd) {
  const double level = xf[kP4] / pd.Ce50p + xf[kR4] / pd.Ce50r;
  const double lg = std::pow(level, pd.gamma);
  return pd.E0 - pd.Emax * (lg / (1.0 + lg));
}

double hill_invert(double y_ref, const PdParams& pd) {
  const double num = pd.E0 - y_ref;
  const double den = pd.Emax - pd.E0 + y_ref;
  if (!(num >= 0.0) || !(den > 0.0)) {
    std::ostringstream msg;
    msg << "BIS set-point " << y_ref << " outside the reachable range ("
        << pd.E0 - pd.Emax << ", " << pd.E0 << "]";
    throw ModelError(msg.str());
  }
  return std::pow(num / den, 1.0 / pd.gamma);
}

Matrix42 steady_state_map(const DiscreteDynamics& dyn) {
  const Matrix4 gap = Matrix4::Identity() - dyn.m.fast;
  Eigen::FullPivLU<Matrix4> lu(gap);
  if (!lu.isInvertible()) {
    throw ModelError("I - A_fast is singular; no unique equilibrium");
  }
  return lu.solve(dyn.m.input);
}

SteadyOutputRow steady_output_row(const DiscreteDynamics& dyn,
                                  const PdParams& pd, double y_ref) {
  SteadyOutputRow row;
  row.gain = effect_row(pd) * steady_state_map(dyn);
  row.level = hill_invert(y_ref, pd);
  return row;
}

}  // namespace anesmpc
