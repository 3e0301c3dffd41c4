#pragma once

// Assembly of every controller ingredient from a patient and a controller
// configuration.

#include "anesmpc/config.hpp"
#include "anesmpc/mpc.hpp"
#include "anesmpc/sim.hpp"

namespace anesmpc {

struct ControlSetup {
  PatientConfig patient;
  ControllerConfig config;
  Plant plant;
  Matrix24 compensation = Matrix24::Zero();
  DisturbanceBound bound;
  InputBox tracking_box;
  SteadyOutputRow output_row;
  SteadyInputSet steady;
  TerminalIngredients terminal;
  int controllability_index = 0;

  ControllerIngredients controller_ingredients() const;
  Controller make_controller() const { return Controller(controller_ingredients()); }
};

ControlSetup build_setup(const PatientConfig& patient, const ControllerConfig& config);

}  // namespace anesmpc
