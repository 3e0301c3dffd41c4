#include "anesmpc/problem.hpp"

namespace anesmpc {

ControllerIngredients ControlSetup::controller_ingredients() const {
  ControllerIngredients ing;
  ing.dynamics = plant.discrete;
  ing.compensation = compensation;
  ing.applied_box = config.applied;
  ing.tracking_box = tracking_box;
  ing.steady = steady;
  ing.terminal = terminal;
  ing.config = config.mpc;
  return ing;
}

ControlSetup build_setup(const PatientConfig& patient, const ControllerConfig& config) {
  ControlSetup s;
  s.patient = patient;
  s.config = config;
  config.mpc.validate();
  s.plant.pd = patient.pd;
  s.plant.continuous = build_continuous(patient.propofol, patient.remifentanil);
  s.plant.discrete = discretize_euler(s.plant.continuous, config.ts);
  s.compensation = compensation_gain(s.plant.discrete.m);
  s.bound = disturbance_bound(s.plant.discrete, config.applied, config.bound_mode, config.m_bar);
  s.tracking_box = tracking_input_set(config.applied, s.bound.m_bar);
  s.output_row = steady_output_row(s.plant.discrete, patient.pd, config.mpc.y_ref);
  s.steady = build_steady_input_set(s.output_row, s.tracking_box, config.mpc.epsilon);
  s.controllability_index = controllability_index(s.plant.discrete.m.fast, s.plant.discrete.m.input);
  s.terminal = compute_terminal_ingredients(s.plant.discrete, config.mpc.Q, config.mpc.R,
                                            s.tracking_box, config.mpc.lambda);
  return s;
}

}  // namespace anesmpc
