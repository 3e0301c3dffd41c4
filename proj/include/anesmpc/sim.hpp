#pragma once

// Nominal closed-loop simulation of the full 8-state patient under the MPC.

#include "anesmpc/mpc.hpp"
#include "anesmpc/pkpd_model.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace anesmpc {

struct Plant {
  ContinuousDynamics continuous;
  DiscreteDynamics discrete;
  PdParams pd;
};

struct SimRecord {
  double t = 0.0;
  double bis = 0.0;
  Input u = Input::Zero();
  Input v = Input::Zero();
  Input v_a = Input::Zero();
  FastState xf = FastState::Zero();
  SlowState xs = SlowState::Zero();
  FastState x_a = FastState::Zero();
  std::string status;
  double solve_ms = 0.0;
  double cost = 0.0;
  bool clamped = false;
};

struct SimLog {
  double ts = 0.0;
  std::vector<SimRecord> records;
};

struct SimOptions {
  double duration = 600.0;
  FullState x0 = FullState::Zero();
  /// Integrate the plant with 1 s Euler sub-steps instead of one Ts step.
  bool plant_substeps = false;
};

/// Runs duration/Ts control steps. Each record holds the state measured at t
/// and the decision applied over [t, t + Ts). Controller infeasibility is
/// rethrown as InfeasibleError carrying the step index.
SimLog simulate_closed_loop(const Plant& plant, Controller& ctrl, const SimOptions& options);

/// Open-loop run under a given input schedule u(step).
SimLog simulate_open_loop(const Plant& plant, const std::function<Input(long)>& input,
                          const SimOptions& options);

struct Metrics {
  double settling_time = 0.0;  // +inf if the band is never held to the end
  double undershoot = 0.0;     // minimum BIS
  double final_error = 0.0;    // |BIS_last - y_ref|
  double max_input_gap_after_settling = 0.0;  // max ||v - v_a||_inf for t >= settling
};

Metrics compute_metrics(const SimLog& log, double y_ref, double band);

/// CSV with the fixed header
/// t,bis,u_p,u_r,v_p,v_r,va_p,va_r,p1,p4,r1,r4,p2,p3,r2,r3,status,solve_ms
/// and 12 significant digits. When `timing` is false the solve_ms column is
/// written as "nan" so that repeated runs are byte-identical.
void write_csv(std::ostream& os, const SimLog& log, bool timing);

extern const char* const kCsvHeader;

}  // namespace anesmpc
