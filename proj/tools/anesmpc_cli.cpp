// anesmpc command-line front end. Talks to the library only through the C API.

#include "anesmpc/anesmpc.h"

#include "CLI11.hpp"

#include <cstdio>
#include <string>

namespace {

struct Args {
  std::string patient;
  std::string config;
  std::string out;
  double duration = 0.0;
  bool svg = false;
  bool timing = false;
  std::string fault;
};

int exit_code(anesmpc_status s) {
  switch (s) {
    case ANESMPC_OK: return 0;
    case ANESMPC_VALIDATION_FAILED: return 1;
    case ANESMPC_INFEASIBLE: return 3;
    default: return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tracking MPC for propofol/remifentanil hypnosis control"};
  app.set_version_flag("--version", std::string(anesmpc_version()));
  app.require_subcommand(1);
  Args a;

  auto common = [&a](CLI::App* sub, bool out_required) {
    sub->add_option("--patient", a.patient, "patient INI file")->required()->check(CLI::ExistingFile);
    sub->add_option("--config", a.config, "controller INI file")->required()->check(CLI::ExistingFile);
    auto* o = sub->add_option("--out", a.out, "output directory");
    if (out_required) o->required();
  };

  auto* ingredients = app.add_subcommand("ingredients", "compute and write K, P, psi, A_w, X_a, D, m_bar, V, Z_s");
  common(ingredients, true);

  auto* simulate = app.add_subcommand("simulate", "closed-loop run written as CSV");
  common(simulate, true);
  simulate->add_option("--duration", a.duration, "simulated time [s] (default: config)")
      ->check(CLI::PositiveNumber);
  simulate->add_flag("--svg", a.svg, "also write SVG plots");
  simulate->add_flag("--timing", a.timing, "record measured solve times (output no longer reproducible)");

  auto* validate = app.add_subcommand("validate", "run the property suite and print a pass/fail matrix");
  common(validate, false);
  validate->add_option("--duration", a.duration, "closed-loop duration [s] (default: config)")
      ->check(CLI::PositiveNumber);
  validate->add_option("--inject-fault", a.fault, "fault injection for self-test")
      ->check(CLI::IsMember({"flip-d"}));

  auto* steady = app.add_subcommand("steady-set", "admissible steady inputs for y_ref");
  common(steady, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  anesmpc_run_options opt{};
  opt.patient_path = a.patient.c_str();
  opt.config_path = a.config.c_str();
  opt.out_dir = a.out.empty() ? nullptr : a.out.c_str();
  opt.duration = a.duration;
  opt.svg = a.svg ? 1 : 0;
  opt.timing = a.timing ? 1 : 0;
  opt.flip_compensation = a.fault == "flip-d" ? 1 : 0;

  anesmpc_status s = ANESMPC_INTERNAL_ERROR;
  if (*ingredients) s = anesmpc_run_ingredients(&opt);
  else if (*simulate) s = anesmpc_run_simulate(&opt);
  else if (*validate) s = anesmpc_run_validate(&opt);
  else if (*steady) s = anesmpc_run_steady_set(&opt);

  std::fflush(stdout);
  if (s != ANESMPC_OK) std::fprintf(stderr, "error: %s\n", anesmpc_last_error());
  return exit_code(s);
}
