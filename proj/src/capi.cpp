#include "anesmpc/anesmpc.h"

#include "anesmpc/errors.hpp"
#include "anesmpc/problem.hpp"
#include "anesmpc/workflow.hpp"

#include <iostream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

using namespace anesmpc;

struct anesmpc_controller {
  ControlSetup setup;
  Controller ctrl;

  explicit anesmpc_controller(ControlSetup s) : setup(std::move(s)), ctrl(setup.make_controller()) {}
};

struct anesmpc_simulation {
  SimLog log;
};

namespace {

thread_local std::string last_error;

anesmpc_status fail(anesmpc_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <class F>
anesmpc_status guarded(F&& body) {
  try {
    const anesmpc_status s = body();
    if (s == ANESMPC_OK) last_error.clear();
    return s;
  } catch (const InfeasibleError& e) {
    return fail(ANESMPC_INFEASIBLE, e.what());
  } catch (const ConfigError& e) {
    return fail(ANESMPC_CONFIG_ERROR, e.what());
  } catch (const ModelError& e) {
    return fail(ANESMPC_CONFIG_ERROR, e.what());
  } catch (const std::bad_alloc&) {
    return fail(ANESMPC_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(ANESMPC_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(ANESMPC_INTERNAL_ERROR, "unknown error");
  }
}

template <class M>
void copy_row_major(const M& m, double* out) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) *out++ = m(i, j);
}

RunRequest to_request(const anesmpc_run_options* o) {
  RunRequest r;
  if (o->patient_path) r.patient = o->patient_path;
  if (o->config_path) r.config = o->config_path;
  if (o->out_dir) r.out = o->out_dir;
  if (o->duration > 0.0) r.duration = o->duration;
  r.svg = o->svg != 0;
  r.timing = o->timing != 0;
  r.flip_compensation = o->flip_compensation != 0;
  return r;
}

}  // namespace

extern "C" {

const char* anesmpc_version(void) { return ANESMPC_VERSION_STRING; }

const char* anesmpc_status_string(anesmpc_status status) {
  switch (status) {
    case ANESMPC_OK: return "ok";
    case ANESMPC_VALIDATION_FAILED: return "validation failed";
    case ANESMPC_CONFIG_ERROR: return "configuration or model error";
    case ANESMPC_INFEASIBLE: return "infeasible";
    case ANESMPC_INVALID_ARGUMENT: return "invalid argument";
    case ANESMPC_INTERNAL_ERROR: return "internal error";
  }
  return "unknown status";
}

const char* anesmpc_last_error(void) { return last_error.c_str(); }

anesmpc_status anesmpc_controller_create(const char* patient_path, const char* config_path,
                                         anesmpc_controller** out) {
  if (!patient_path || !config_path || !out) return fail(ANESMPC_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto c = std::make_unique<anesmpc_controller>(
        build_setup(load_patient(patient_path), load_controller_config(config_path)));
    *out = c.release();
    return ANESMPC_OK;
  });
}

anesmpc_status anesmpc_controller_create_from_text(const char* patient_ini, const char* config_ini,
                                                   anesmpc_controller** out) {
  if (!patient_ini || !config_ini || !out) return fail(ANESMPC_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    std::istringstream p(patient_ini), c(config_ini);
    const PatientConfig pat = parse_patient(p);
    const ControllerConfig cfg = parse_controller_config(c);
    auto h = std::make_unique<anesmpc_controller>(build_setup(pat, cfg));
    *out = h.release();
    return ANESMPC_OK;
  });
}

void anesmpc_controller_destroy(anesmpc_controller* ctrl) { delete ctrl; }

anesmpc_status anesmpc_controller_info(const anesmpc_controller* ctrl, anesmpc_info* out) {
  if (!ctrl || !out) return fail(ANESMPC_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const ControlSetup& s = ctrl->setup;
    out->horizon = s.config.mpc.horizon;
    out->ts = s.config.ts;
    copy_row_major(s.terminal.K, out->K);
    copy_row_major(s.terminal.P, out->P);
    copy_row_major(s.compensation, out->D);
    for (int i = 0; i < 2; ++i) {
      out->m_bar[i] = s.bound.m_bar[i];
      out->u_lower[i] = s.config.applied.lower[i];
      out->u_upper[i] = s.config.applied.upper[i];
      out->v_lower[i] = s.tracking_box.lower[i];
      out->v_upper[i] = s.tracking_box.upper[i];
      out->steady_gain[i] = s.steady.gain[i];
    }
    out->steady_level = s.steady.level;
    out->lambda = s.terminal.lambda;
    out->determination_index = s.terminal.determination_index;
    out->terminal_rows = static_cast<int>(s.terminal.x_a.rows());
    out->controllability_index = s.controllability_index;
    return ANESMPC_OK;
  });
}

anesmpc_status anesmpc_controller_step(anesmpc_controller* ctrl, const double xf[4], const double xs[4],
                                       anesmpc_step_result* out) {
  if (!ctrl || !xf || !xs || !out) return fail(ANESMPC_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const ControlOutput o = ctrl->ctrl.step(Eigen::Map<const FastState>(xf), Eigen::Map<const SlowState>(xs));
    for (int i = 0; i < 2; ++i) {
      out->u[i] = o.u[i];
      out->v0[i] = o.v0[i];
      out->v_a[i] = o.v_a[i];
    }
    for (int i = 0; i < 4; ++i) out->x_a[i] = o.x_a[i];
    out->cost = o.cost;
    out->qp_iterations = o.qp_iterations;
    out->clamped = o.clamped ? 1 : 0;
    out->solve_ms = o.solve_ms;
    return ANESMPC_OK;
  });
}

anesmpc_status anesmpc_controller_reset(anesmpc_controller* ctrl) {
  if (!ctrl) return fail(ANESMPC_INVALID_ARGUMENT, "null argument");
  ctrl->ctrl.reset();
  last_error.clear();
  return ANESMPC_OK;
}

anesmpc_status anesmpc_plant_step(const anesmpc_controller* ctrl, double x[8], const double u[2]) {
  if (!ctrl || !x || !u) return fail(ANESMPC_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    FastState xf = Eigen::Map<const FastState>(x);
    SlowState xs = Eigen::Map<const SlowState>(x + 4);
    step_full(ctrl->setup.plant.discrete, xf, xs, Eigen::Map<const Input>(u));
    Eigen::Map<FastState> xf_out(x);
    Eigen::Map<SlowState> xs_out(x + 4);
    xf_out = xf;
    xs_out = xs;
    return ANESMPC_OK;
  });
}

anesmpc_status anesmpc_bis(const anesmpc_controller* ctrl, const double xf[4], double* bis) {
  if (!ctrl || !xf || !bis) return fail(ANESMPC_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *bis = bis_output(Eigen::Map<const FastState>(xf), ctrl->setup.plant.pd);
    return ANESMPC_OK;
  });
}

anesmpc_status anesmpc_simulate(anesmpc_controller* ctrl, double duration, anesmpc_simulation** out) {
  if (!ctrl || !out) return fail(ANESMPC_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    SimOptions opt;
    opt.duration = duration;
    opt.plant_substeps = ctrl->setup.config.plant_substeps;
    auto sim = std::make_unique<anesmpc_simulation>();
    sim->log = simulate_closed_loop(ctrl->setup.plant, ctrl->ctrl, opt);
    *out = sim.release();
    return ANESMPC_OK;
  });
}

size_t anesmpc_simulation_length(const anesmpc_simulation* sim) {
  return sim ? sim->log.records.size() : 0;
}

anesmpc_status anesmpc_simulation_row(const anesmpc_simulation* sim, size_t index,
                                      double row[ANESMPC_SIM_COLUMNS]) {
  if (!sim || !row) return fail(ANESMPC_INVALID_ARGUMENT, "null argument");
  if (index >= sim->log.records.size()) return fail(ANESMPC_INVALID_ARGUMENT, "row index out of range");
  const SimRecord& r = sim->log.records[index];
  double* p = row;
  *p++ = r.t;
  *p++ = r.bis;
  for (int i = 0; i < 2; ++i) *p++ = r.u[i];
  for (int i = 0; i < 2; ++i) *p++ = r.v[i];
  for (int i = 0; i < 2; ++i) *p++ = r.v_a[i];
  for (int i = 0; i < 4; ++i) *p++ = r.xf[i];
  for (int i = 0; i < 4; ++i) *p++ = r.xs[i];
  *p = r.cost;
  last_error.clear();
  return ANESMPC_OK;
}

void anesmpc_simulation_destroy(anesmpc_simulation* sim) { delete sim; }

anesmpc_status anesmpc_run_ingredients(const anesmpc_run_options* opt) {
  if (!opt) return fail(ANESMPC_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    run_ingredients(to_request(opt), std::cout);
    return ANESMPC_OK;
  });
}

anesmpc_status anesmpc_run_simulate(const anesmpc_run_options* opt) {
  if (!opt) return fail(ANESMPC_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    run_simulate(to_request(opt), std::cout);
    return ANESMPC_OK;
  });
}

anesmpc_status anesmpc_run_validate(const anesmpc_run_options* opt) {
  if (!opt) return fail(ANESMPC_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    if (run_validate(to_request(opt), std::cout)) return ANESMPC_OK;
    last_error = "one or more validation checks failed";
    return ANESMPC_VALIDATION_FAILED;
  });
}

anesmpc_status anesmpc_run_steady_set(const anesmpc_run_options* opt) {
  if (!opt) return fail(ANESMPC_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    run_steady_set(to_request(opt), std::cout);
    return ANESMPC_OK;
  });
}

}  // extern "C"
