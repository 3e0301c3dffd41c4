#pragma once

// INI-style configuration files.
//
// Patient file: sections [propofol], [remifentanil] with keys V1 V2 V3 [L],
// Cl1 Cl2 Cl3 [L/min], ke [1/min]; section [pd] with E0 Emax gamma Ce50p Ce50r.
// Rates are converted to per-second on load.
//
// Controller file: section [controller] (N, Ts, Q_diag, R_diag, epsilon,
// lambda, y_ref, u_min, u_max, disturbance_bound_mode, m_bar), section [vd]
// (weight, direction, offset, linear) and section [simulation] (duration,
// settling_band, plant_substeps). Vectors are whitespace or comma separated.

#include "anesmpc/compensation.hpp"
#include "anesmpc/mpc.hpp"
#include "anesmpc/pkpd_model.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace anesmpc {

struct PatientConfig {
  DrugPkParams propofol;
  DrugPkParams remifentanil;
  PdParams pd;
};

struct ControllerConfig {
  MpcConfig mpc;
  double ts = 5.0;
  InputBox applied{Input(0.0, 0.0), Input(6.67, 16.67)};
  DisturbanceBoundMode bound_mode = DisturbanceBoundMode::Simulated;
  std::optional<Input> m_bar;
  double duration = 600.0;
  double settling_band = 2.0;
  bool plant_substeps = false;
};

PatientConfig parse_patient(std::istream& is);
PatientConfig load_patient(const std::filesystem::path& path);

ControllerConfig parse_controller_config(std::istream& is);
ControllerConfig load_controller_config(const std::filesystem::path& path);

}  // namespace anesmpc
