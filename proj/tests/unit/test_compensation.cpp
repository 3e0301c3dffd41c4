#include "doctest.h"

#include "anesmpc/compensation.hpp"
#include "anesmpc/errors.hpp"
#include "oracle_values.hpp"
#include "support.hpp"

#include <random>

using namespace anesmpc;

TEST_CASE("D has the clearance closed form") {
  const auto& s = testing::sample_setup();
  const auto& p = s.patient.propofol;
  const auto& r = s.patient.remifentanil;
  Matrix24 expect = Matrix24::Zero();
  // per-second clearances times Ts over the discrete input scale
  expect << -p.Cl2, -p.Cl3, 0, 0, 0, 0, -r.Cl2, -r.Cl3;
  const Matrix24 D = compensation_gain(s.plant.continuous.m);
  CHECK(testing::max_abs_diff(D, expect) <= 1e-15);
  CHECK(testing::max_abs_diff(compensation_gain(s.plant.discrete.m), expect) <= 1e-15);
  // least-squares oracle
  CHECK(testing::max_abs_diff(s.compensation, testing::row_major<2, 4>(oracle::kD)) <= 1e-15);
}

TEST_CASE("A_s + B D vanishes") {
  const auto& m = testing::sample_setup().plant.discrete.m;
  const Matrix4 r = m.slow_on_fast + m.input * compensation_gain(m);
  CHECK(r.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("no slow coupling gives D = 0") {
  DynamicsMatrices m = testing::sample_setup().plant.discrete.m;
  m.slow_on_fast.setZero();
  CHECK(compensation_gain(m).isZero(0.0));
}

TEST_CASE("fixed mode echoes m_bar") {
  const auto& s = testing::sample_setup();
  const DisturbanceBound b = disturbance_bound(s.plant.discrete, s.config.applied, DisturbanceBoundMode::Fixed,
                                               Input(0.12, 0.27));
  CHECK(b.m_bar == Input(0.12, 0.27));
  CHECK(s.bound.m_bar == Input(0.12, 0.27));
  CHECK_THROWS_AS(disturbance_bound(s.plant.discrete, s.config.applied, DisturbanceBoundMode::Fixed),
                  ConfigError);
  CHECK_THROWS_AS(disturbance_bound(s.plant.discrete, s.config.applied, DisturbanceBoundMode::Fixed,
                                    Input(-0.1, 0.0)),
                  ConfigError);
}

TEST_CASE("zero upper input gives zero bound") {
  const auto& s = testing::sample_setup();
  const InputBox U{Input::Zero(), Input::Zero()};
  for (auto mode : {DisturbanceBoundMode::WorstCase, DisturbanceBoundMode::Simulated}) {
    CHECK(disturbance_bound(s.plant.discrete, U, mode).m_bar.isZero(0.0));
  }
}

TEST_CASE("worst case dominates simulation") {
  const auto& s = testing::sample_setup();
  const DisturbanceBound wc = disturbance_bound(s.plant.discrete, s.config.applied, DisturbanceBoundMode::WorstCase);
  const DisturbanceBound sim = disturbance_bound(s.plant.discrete, s.config.applied, DisturbanceBoundMode::Simulated);
  CHECK((wc.m_bar.array() >= sim.m_bar.array()).all());
  CHECK(wc.m_bar[0] == doctest::Approx(oracle::kMbarWorstCase[0]).epsilon(1e-10));
  CHECK(wc.m_bar[1] == doctest::Approx(oracle::kMbarWorstCase[1]).epsilon(1e-10));
  CHECK(sim.m_bar[0] == doctest::Approx(oracle::kMbarSimulated[0]).epsilon(1e-8));
  CHECK(sim.m_bar[1] == doctest::Approx(oracle::kMbarSimulated[1]).epsilon(1e-8));
  CHECK(sim.steps > 0);
  // global equilibrium: every compartment at u_max / Cl1 (per-second rates)
  for (int i = 0; i < 4; ++i) CHECK(wc.slow_bound[i] == doctest::Approx(oracle::kEquilibriumAtUmax[4 + i]).epsilon(1e-10));
  const auto& pt = s.patient;
  CHECK(wc.slow_bound[0] == doctest::Approx(6.67 / pt.propofol.Cl1).epsilon(1e-10));
  CHECK(wc.slow_bound[2] == doctest::Approx(16.67 / pt.remifentanil.Cl1).epsilon(1e-10));
}

TEST_CASE("tracking set is the Pontryagin difference") {
  const InputBox U{Input(0.0, 0.0), Input(6.67, 16.67)};
  const Input mb(0.12, 0.27);
  const InputBox V = tracking_input_set(U, mb);
  CHECK(V.lower[0] == doctest::Approx(0.12));
  CHECK(V.lower[1] == doctest::Approx(0.27));
  CHECK(V.upper == U.upper);

  // every v in V survives every m in M; points just outside V do not
  const int n = 11;
  auto survives = [&](const Input& v) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Input m(-mb[0] * i / (n - 1), -mb[1] * j / (n - 1));
        if (!U.contains(v + m, 1e-12)) return false;
      }
    return true;
  };
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const Input v(V.lower[0] + t(rng) * (V.upper[0] - V.lower[0]), V.lower[1] + t(rng) * (V.upper[1] - V.lower[1]));
    CHECK(survives(v));
  }
  CHECK_FALSE(survives(V.lower - Input(1e-6, 0.0)));
  CHECK_FALSE(survives(V.lower - Input(0.0, 1e-6)));
  CHECK_FALSE(survives(V.upper + Input(1e-6, 0.0)));
}

TEST_CASE("tracking set degenerate cases") {
  const InputBox U{Input(0.0, 0.0), Input(6.67, 16.67)};
  const InputBox same = tracking_input_set(U, Input::Zero());
  CHECK(same.lower == U.lower);
  CHECK(same.upper == U.upper);
  const InputBox point = tracking_input_set(U, U.upper);
  CHECK(point.lower == point.upper);
  try {
    tracking_input_set(U, Input(7.0, 0.0));
    FAIL("expected ModelError");
  } catch (const ModelError& e) {
    CHECK(std::string(e.what()).find("input box too tight for disturbance bound") != std::string::npos);
  }
}

TEST_CASE("worst-case bound is admissible when Cl1 exceeds Cl2 + Cl3") {
  // steady D x_s = -(Cl2 + Cl3) u / Cl1, so V stays nonempty
  DrugPkParams p{5.0, 20.0, 100.0, 0.05, 0.02, 0.01, 0.01};
  const DiscreteDynamics d = discretize_euler(build_continuous(p, p), 5.0);
  const InputBox U{Input::Zero(), Input(6.67, 16.67)};
  const DisturbanceBound b = disturbance_bound(d, U, DisturbanceBoundMode::WorstCase);
  CHECK(b.m_bar[0] == doctest::Approx(6.67 * 0.03 / 0.05));
  CHECK(b.m_bar[1] == doctest::Approx(16.67 * 0.03 / 0.05));
  const InputBox V = tracking_input_set(U, b.m_bar);
  CHECK((V.lower.array() < V.upper.array()).all());
}

TEST_CASE("mode names") {
  CHECK(parse_disturbance_bound_mode("worst-case") == DisturbanceBoundMode::WorstCase);
  CHECK(parse_disturbance_bound_mode("simulated") == DisturbanceBoundMode::Simulated);
  CHECK(parse_disturbance_bound_mode("fixed") == DisturbanceBoundMode::Fixed);
  CHECK_THROWS_AS(parse_disturbance_bound_mode("median"), ConfigError);
  for (auto m : {DisturbanceBoundMode::WorstCase, DisturbanceBoundMode::Simulated, DisturbanceBoundMode::Fixed})
    CHECK(parse_disturbance_bound_mode(to_string(m)) == m);
}
