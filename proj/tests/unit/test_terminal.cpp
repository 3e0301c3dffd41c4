#include "doctest.h"

#include "anesmpc/errors.hpp"
#include "anesmpc/terminal.hpp"
#include "oracle_values.hpp"
#include "support.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace anesmpc;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd scalar(double v) { return MatrixXd::Constant(1, 1, v); }

Polyhedron unit_box(int n) {
  MatrixXd F(2 * n, n);
  F << MatrixXd::Identity(n, n), -MatrixXd::Identity(n, n);
  return Polyhedron(F, VectorXd::Ones(2 * n));
}

}  // namespace

TEST_CASE("scalar DARE closed form") {
  const DareSolution s = solve_dare(scalar(0.5), scalar(1), scalar(1), scalar(1));
  const double p = (0.25 + std::sqrt(4.0625)) / 2.0;
  CHECK(s.P(0, 0) == doctest::Approx(p).epsilon(1e-12));
  CHECK(s.P(0, 0) == doctest::Approx(1.132782).epsilon(1e-6));
  CHECK(s.K(0, 0) == doctest::Approx(-0.5 * p / (1 + p)).epsilon(1e-12));
  CHECK(s.residual <= 1e-12);
}

TEST_CASE("A = 0 gives P = Q and K = 0") {
  const MatrixXd Q = Eigen::Vector2d(2.0, 3.0).asDiagonal();
  const DareSolution s = solve_dare(MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2), Q, MatrixXd::Identity(2, 2));
  CHECK(testing::max_abs_diff(s.P, Q) <= 1e-14);
  CHECK(s.K.cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("DARE rejects unobservable and bad weights") {
  MatrixXd A = Eigen::Vector2d(0.5, 0.9).asDiagonal();
  const MatrixXd B = MatrixXd::Identity(2, 2);
  const MatrixXd Q = Eigen::Vector2d(1.0, 0.0).asDiagonal();
  CHECK_THROWS_AS(solve_dare(A, B, Q, B), ModelError);
  CHECK_THROWS_AS(solve_dare(A, B, -MatrixXd::Identity(2, 2), B), ConfigError);
  CHECK_THROWS_AS(solve_dare(A, B, B, MatrixXd::Zero(2, 2)), ConfigError);
  MatrixXd Bz = MatrixXd::Zero(2, 1);
  A(1, 1) = 1.5;
  CHECK_THROWS_AS(solve_dare(A, Bz, B, scalar(1)), ModelError);
}

TEST_CASE("sample patient DARE matches scipy") {
  const auto& s = testing::sample_setup();
  const auto& t = s.terminal;
  CHECK(testing::max_abs_diff(t.P, testing::row_major<4, 4>(oracle::kP)) <= 1e-9 * 218.0);
  CHECK(testing::max_abs_diff(t.K, testing::row_major<2, 4>(oracle::kK)) <= 1e-10);
  CHECK(t.dare_residual <= 1e-8);
  CHECK(dare_residual(s.plant.discrete.m.fast, s.plant.discrete.m.input, s.config.mpc.Q, s.config.mpc.R, t.P) <= 1e-8);
  // block diagonal across drugs
  CHECK(t.P.topRightCorner(2, 2).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(t.K.topRightCorner(1, 2).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(t.K.bottomLeftCorner(1, 2).cwiseAbs().maxCoeff() <= 1e-10);
  const MatrixXd cl = MatrixXd(s.plant.discrete.m.fast) + MatrixXd(s.plant.discrete.m.input) * t.K;
  CHECK(spectral_radius(cl) < 1.0);
}

TEST_CASE("sample patient gains are near the reference values") {
  // loose: the PK/PD values come from population models
  const auto& t = testing::sample_setup().terminal;
  const double K_pub[4] = {0.671, 1.58, 0.677, 1.267};
  const double K_got[4] = {t.K(0, 0), t.K(0, 1), t.K(1, 2), t.K(1, 3)};
  for (int i = 0; i < 4; ++i) CHECK(std::abs(std::abs(K_got[i]) - K_pub[i]) <= 0.1 * K_pub[i]);
  CHECK(std::abs(t.P(1, 1) - 218.025) <= 0.1 * 218.025);
  CHECK(std::abs(t.P(3, 3) - 58.574) <= 0.1 * 58.574);
}

TEST_CASE("controllability index") {
  const auto& s = testing::sample_setup();
  CHECK(controllability_index(s.plant.discrete.m.fast, s.plant.discrete.m.input) == 2);
  CHECK(s.controllability_index == 2);
  CHECK(s.config.mpc.horizon >= 2);
  CHECK(controllability_index(MatrixXd::Zero(3, 3), MatrixXd::Identity(3, 3)) == 1);
  MatrixXd B = MatrixXd::Zero(2, 1);
  B(0, 0) = 1;
  CHECK_THROWS_AS(controllability_index(MatrixXd::Identity(2, 2), B), ModelError);
}

TEST_CASE("extended dynamics with K = 0") {
  const auto& m = testing::sample_setup().plant.discrete.m;
  const ExtendedDynamics e = extended_dynamics(m.fast, m.input, MatrixXd::Zero(2, 4));
  CHECK(e.psi.isZero(0.0));
  CHECK(e.a_w.topLeftCorner(4, 4) == MatrixXd(m.fast));
  CHECK(e.a_w.topRightCorner(4, 2) == MatrixXd(m.input));
  CHECK(e.a_w.bottomLeftCorner(2, 4).isZero(0.0));
  CHECK(e.a_w.bottomRightCorner(2, 2).isIdentity(0.0));
}

TEST_CASE("A_w fixed points are the steady pairs") {
  const auto& s = testing::sample_setup();
  const auto& t = s.terminal;
  const Eigen::EigenSolver<MatrixXd> es(t.a_w);
  int unit = 0;
  for (Eigen::Index i = 0; i < 6; ++i) unit += std::abs(es.eigenvalues()[i] - 1.0) <= 1e-9;
  CHECK(unit == 2);

  const Eigen::FullPivLU<MatrixXd> lu(t.a_w - MatrixXd::Identity(6, 6));
  const MatrixXd ker = lu.kernel();
  REQUIRE(ker.cols() == 2);
  const Matrix42 map = steady_state_map(s.plant.discrete);
  for (Eigen::Index j = 0; j < 2; ++j) {
    const VectorXd w = ker.col(j);
    const VectorXd x = map * w.tail(2);
    CHECK((w.head(4) - x).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, x.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("W_lambda with K = 0 is lambda V on the input") {
  const InputBox V{Input(0.12, 0.27), Input(6.67, 16.67)};
  const Polyhedron W = build_w_lambda(MatrixXd::Zero(2, 4), MatrixXd::Zero(2, 2), V, 0.9);
  CHECK(W.rows() == 8);
  const InputBox lv = scale_box(V, 0.9);
  CHECK(lv.center().isApprox(V.center()));
  CHECK((lv.upper - lv.lower).isApprox(0.9 * (V.upper - V.lower)));
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 18.0);
  for (int i = 0; i < 500; ++i) {
    VectorXd w(6);
    w << 100 * u(rng), u(rng), u(rng), u(rng), u(rng), u(rng);
    CHECK(contains(W, w, 0.0) == lv.contains(w.tail<2>()));
  }
  CHECK_THROWS_AS(build_w_lambda(MatrixXd::Zero(2, 4), MatrixXd::Zero(2, 2), V, 1.0), ConfigError);
  CHECK_THROWS_AS(build_w_lambda(MatrixXd::Zero(2, 4), MatrixXd::Zero(2, 2), V, 0.0), ConfigError);
  const InputBox empty{Input(1, 1), Input(0, 0)};
  CHECK_THROWS_AS(build_w_lambda(MatrixXd::Zero(2, 4), MatrixXd::Zero(2, 2), empty, 0.5), ModelError);
}

TEST_CASE("invariant set of the zero map is W") {
  const InvariantSet s = max_admissible_invariant_set(MatrixXd::Zero(2, 2), unit_box(2));
  CHECK(s.determination_index == 0);
  CHECK(s.set.rows() == 4);
}

TEST_CASE("invariant set of a contraction is W") {
  const InvariantSet s = max_admissible_invariant_set(scalar(0.5), unit_box(1));
  CHECK(s.determination_index == 0);
  REQUIRE(s.set.rows() == 2);
  // brute force: every grid point of W stays in W
  for (int i = -10; i <= 10; ++i) {
    double w = i / 10.0;
    for (int k = 0; k < 30; ++k, w *= 0.5) CHECK(std::abs(w) <= 1.0);
    CHECK(contains(s.set, VectorXd::Constant(1, i / 10.0)));
  }
}

TEST_CASE("invariant set of a rotation-contraction needs propagation") {
  const double a = 0.3, r = 0.95;
  MatrixXd A(2, 2);
  A << r * std::cos(a), -r * std::sin(a), r * std::sin(a), r * std::cos(a);
  const InvariantSet s = max_admissible_invariant_set(A, unit_box(2));
  CHECK(s.determination_index > 0);
  // invariance on samples, and maximality: points of W outside the set leave W
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    VectorXd w(2);
    w << u(rng), u(rng);
    if (contains(s.set, w, 0.0)) {
      CHECK(contains(s.set, A * w, 1e-9));
    } else {
      bool left = false;
      VectorXd x = w;
      for (int k = 0; k <= s.determination_index + 1 && !left; ++k, x = A * x) left = !contains(unit_box(2), x, 1e-12);
      CHECK(left);
    }
  }
}

TEST_CASE("determination index does not depend on row scaling") {
  const auto& t = testing::sample_setup().terminal;
  Polyhedron scaled = t.w_lambda;
  for (Eigen::Index i = 0; i < scaled.rows(); ++i) {
    const double f = std::pow(10.0, static_cast<double>(i % 5) - 2.0);
    scaled.F.row(i) *= f;
    scaled.g[i] *= f;
  }
  const InvariantSet a = max_admissible_invariant_set(t.a_w, t.w_lambda);
  const InvariantSet b = max_admissible_invariant_set(t.a_w, scaled);
  CHECK(a.determination_index == b.determination_index);
  CHECK(a.set.rows() == b.set.rows());
}

TEST_CASE("sample terminal set") {
  const auto& t = testing::sample_setup().terminal;
  CHECK(t.lambda == 0.99);
  CHECK(t.w_lambda.rows() == 8);
  CHECK(t.determination_index == 11);
  CHECK(t.determination_index <= 500);
  CHECK(t.x_a.rows() == 44);
  // the committed sample matches a fresh computation row for row
  const Polyhedron ref = load_polyhedron(testing::test_data("X_a_sample.txt"));
  REQUIRE(ref.rows() == t.x_a.rows());
  CHECK(testing::max_abs_diff(ref.F, t.x_a.F) <= 1e-12);
  CHECK(testing::max_abs_diff(ref.g, t.x_a.g) <= 1e-12);
}

TEST_CASE("no finite determination reports the cause") {
  // pure rotation: the maximal invariant set of a box is not finitely determined
  const double a = 1.0;
  MatrixXd A(2, 2);
  A << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  try {
    max_admissible_invariant_set(A, unit_box(2), 40);
    FAIL("expected ModelError");
  } catch (const ModelError& e) {
    CHECK(std::string(e.what()).find("finite determination failed") != std::string::npos);
  }
}

TEST_CASE("compute_terminal_ingredients rejects lambda = 1") {
  const auto& s = testing::sample_setup();
  try {
    compute_terminal_ingredients(s.plant.discrete, s.config.mpc.Q, s.config.mpc.R, s.tracking_box, 1.0);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("finite determination") != std::string::npos);
  }
}
