#include "anesmpc/sim.hpp"

#include "anesmpc/errors.hpp"
#include "anesmpc/text_matrix.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace anesmpc {

const char* const kCsvHeader =
    "t,bis,u_p,u_r,v_p,v_r,va_p,va_r,p1,p4,r1,r4,p2,p3,r2,r3,status,solve_ms";

namespace {

long step_count(double duration, double ts) {
  if (!(duration >= 0.0)) throw ConfigError("duration must be >= 0");
  const double steps = duration / ts;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps)) {
    throw ConfigError("duration must be a multiple of Ts");
  }
  return static_cast<long>(rounded);
}

struct PlantStepper {
  DiscreteDynamics fine;
  int substeps = 1;

  PlantStepper(const Plant& plant, bool use_substeps) : fine(plant.discrete) {
    if (use_substeps) {
      substeps = std::max(1, static_cast<int>(std::lround(plant.discrete.ts)));
      fine = discretize_euler(plant.continuous, plant.discrete.ts / substeps);
    }
  }

  void advance(FastState& xf, SlowState& xs, const Input& u) const {
    for (int i = 0; i < substeps; ++i) step_full(fine, xf, xs, u);
  }
};

}  // namespace

SimLog simulate_closed_loop(const Plant& plant, Controller& ctrl, const SimOptions& options) {
  if ((options.x0.array() < 0.0).any()) throw ConfigError("initial state must be >= 0");
  const long steps = step_count(options.duration, plant.discrete.ts);
  const PlantStepper stepper(plant, options.plant_substeps);

  SimLog log;
  log.ts = plant.discrete.ts;
  log.records.reserve(static_cast<std::size_t>(steps));
  FastState xf = options.x0.head<4>();
  SlowState xs = options.x0.tail<4>();
  ctrl.reset();
  for (long k = 0; k < steps; ++k) {
    ControlOutput out;
    try {
      out = ctrl.step(xf, xs);
    } catch (const InfeasibleError& e) {
      throw InfeasibleError(std::string(e.what()) + " (step " + std::to_string(k) + ")", k);
    }
    SimRecord rec;
    rec.t = static_cast<double>(k) * plant.discrete.ts;
    rec.bis = bis_output(xf, plant.pd);
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
    log.records.push_back(rec);
    stepper.advance(xf, xs, out.u);
  }
  return log;
}

SimLog simulate_open_loop(const Plant& plant, const std::function<Input(long)>& input,
                          const SimOptions& options) {
  const long steps = step_count(options.duration, plant.discrete.ts);
  const PlantStepper stepper(plant, options.plant_substeps);
  SimLog log;
  log.ts = plant.discrete.ts;
  FastState xf = options.x0.head<4>();
  SlowState xs = options.x0.tail<4>();
  for (long k = 0; k < steps; ++k) {
    SimRecord rec;
    rec.t = static_cast<double>(k) * plant.discrete.ts;
    rec.bis = bis_output(xf, plant.pd);
    rec.u = input(k);
    rec.v = rec.u;
    rec.xf = xf;
    rec.xs = xs;
    rec.status = "open-loop";
    log.records.push_back(rec);
    stepper.advance(xf, xs, rec.u);
  }
  return log;
}

Metrics compute_metrics(const SimLog& log, double y_ref, double band) {
  if (log.records.empty()) throw ConfigError("compute_metrics: empty log");
  Metrics m;
  m.undershoot = std::numeric_limits<double>::infinity();
  for (const auto& r : log.records) m.undershoot = std::min(m.undershoot, r.bis);

  // Walk backwards to the last out-of-band sample.
  std::size_t first_settled = log.records.size();
  for (std::size_t i = log.records.size(); i-- > 0;) {
    if (std::abs(log.records[i].bis - y_ref) > band) break;
    first_settled = i;
  }
  m.settling_time = first_settled < log.records.size()
                        ? log.records[first_settled].t
                        : std::numeric_limits<double>::infinity();
  m.final_error = std::abs(log.records.back().bis - y_ref);
  for (std::size_t i = first_settled; i < log.records.size(); ++i) {
    const auto& r = log.records[i];
    m.max_input_gap_after_settling =
        std::max(m.max_input_gap_after_settling, (r.v - r.v_a).cwiseAbs().maxCoeff());
  }
  return m;
}

void write_csv(std::ostream& os, const SimLog& log, bool timing) {
  os << kCsvHeader << '\n';
  auto num = [&](double v) { os << format_double(v, 12); };
  for (const auto& r : log.records) {
    num(r.t);
    for (double v : {r.bis, r.u[0], r.u[1], r.v[0], r.v[1], r.v_a[0], r.v_a[1], r.xf[kP1],
                     r.xf[kP4], r.xf[kR1], r.xf[kR4], r.xs[kP2], r.xs[kP3], r.xs[kR2],
                     r.xs[kR3]}) {
      os << ',';
      num(v);
    }
    os << ',' << r.status << ',';
    if (timing) {
      num(r.solve_ms);
    } else {
      os << "nan";
    }
    os << '\n';
  }
}

}  // namespace anesmpc
