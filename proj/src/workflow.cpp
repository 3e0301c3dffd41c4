#include "anesmpc/workflow.hpp"

#include "anesmpc/errors.hpp"
#include "anesmpc/svg.hpp"
#include "anesmpc/text_matrix.hpp"
#include "anesmpc/validate.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#ifndef ANESMPC_VERSION_STRING
#define ANESMPC_VERSION_STRING "0.0.0"
#endif

namespace anesmpc {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw ConfigError("cannot read " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) throw ConfigError("--out is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
}

struct Loaded {
  PatientConfig patient;
  ControllerConfig config;
};

Loaded load(const RunRequest& req) {
  if (req.patient.empty()) throw ConfigError("--patient is required");
  if (req.config.empty()) throw ConfigError("--config is required");
  Loaded l{load_patient(req.patient), load_controller_config(req.config)};
  if (req.duration) l.config.duration = *req.duration;
  return l;
}

json base_manifest(const std::string& sub, const RunRequest& req, const ControllerConfig& cfg) {
  json m;
  m["tool"] = "anesmpc";
  m["version"] = ANESMPC_VERSION_STRING;
  m["subcommand"] = sub;
  m["timestamp"] = utc_timestamp();
  m["patient"] = req.patient.string();
  m["config"] = req.config.string();
  m["output_directory"] = req.out.string();
  json p;
  p["N"] = cfg.mpc.horizon;
  p["Ts"] = cfg.ts;
  p["lambda"] = cfg.mpc.lambda;
  p["epsilon"] = cfg.mpc.epsilon;
  p["y_ref"] = cfg.mpc.y_ref;
  p["disturbance_bound_mode"] = to_string(cfg.bound_mode);
  if (cfg.m_bar) p["m_bar_config"] = vec(*cfg.m_bar);
  p["duration"] = cfg.duration;
  p["plant_substeps"] = cfg.plant_substeps;
  p["svg"] = req.svg;
  p["timing"] = req.timing;
  m["parameters"] = p;
  // The raw inputs make the manifest self-contained for reruns.
  m["patient_text"] = read_text(req.patient);
  m["config_text"] = read_text(req.config);
  return m;
}

void write_manifest(const fs::path& dir, const json& m) {
  std::ofstream os(dir / "manifest.json");
  if (!os) throw ConfigError("cannot write manifest");
  os << m.dump(2) << '\n';
}

Eigen::MatrixXd box_matrix(const InputBox& b) {
  Eigen::MatrixXd m(2, 2);
  m.row(0) = b.lower.transpose();
  m.row(1) = b.upper.transpose();
  return m;
}

std::string cell(double v, int w = 14) {
  std::ostringstream os;
  os << std::setw(w) << format_double(v + 0.0, 6);
  return os.str();
}

void print_matrix(std::ostream& log, const std::string& name, const Eigen::MatrixXd& m) {
  log << name << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    log << "  ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) log << cell(m(i, j));
    log << '\n';
  }
}

}  // namespace

Input offset_cost_minimizer(const OffsetCost& cost, const Input& a, const Input& b) {
  // cost(a + t (b - a)) = w (r0 + t s)^2 + l.a + t l.(b - a), t in [0, 1]
  const Input d = b - a;
  const double r0 = cost.direction.dot(a) - cost.offset;
  const double s = cost.direction.dot(d);
  const double lin = cost.linear.dot(d);
  double t = 0.0;
  if (cost.weight * s * s > 0.0) {
    t = -(2.0 * cost.weight * r0 * s + lin) / (2.0 * cost.weight * s * s);
  } else {
    t = lin < 0.0 ? 1.0 : 0.0;
  }
  t = std::clamp(t, 0.0, 1.0);
  return a + t * d;
}

void run_ingredients(const RunRequest& req, std::ostream& log) {
  const Loaded l = load(req);
  ensure_dir(req.out);
  const ControlSetup s = build_setup(l.patient, l.config);
  const TerminalIngredients& t = s.terminal;
  const auto seg = steady_segment(s.steady);
  Eigen::MatrixXd zs(2, 2);
  zs.row(0) = seg.first.transpose();
  zs.row(1) = seg.second.transpose();
  Eigen::MatrixXd row(1, 3);
  row << s.steady.gain, s.steady.level;

  const fs::path& d = req.out;
  save_matrix(d / "K.txt", t.K);
  save_matrix(d / "P.txt", t.P);
  save_matrix(d / "psi.txt", t.psi);
  save_matrix(d / "A_w.txt", t.a_w);
  save_polyhedron(d / "W_lambda.txt", t.w_lambda);
  save_polyhedron(d / "X_a.txt", t.x_a);
  save_matrix(d / "D.txt", s.compensation);
  save_matrix(d / "m_bar.txt", s.bound.m_bar);
  save_matrix(d / "U.txt", box_matrix(s.config.applied));
  save_matrix(d / "V.txt", box_matrix(s.tracking_box));
  save_matrix(d / "Z_s.txt", zs);
  save_matrix(d / "steady_row.txt", row);

  json m = base_manifest("ingredients", req, l.config);
  json r;
  r["m_bar"] = vec(s.bound.m_bar);
  r["lambda"] = t.lambda;
  r["determination_index"] = t.determination_index;
  r["terminal_rows"] = t.x_a.rows();
  r["controllability_index"] = s.controllability_index;
  r["dare_iterations"] = t.dare_iterations;
  r["dare_residual"] = t.dare_residual;
  m["results"] = r;
  m["outputs"] = {"K.txt", "P.txt", "psi.txt", "A_w.txt", "W_lambda.txt", "X_a.txt", "D.txt",
                  "m_bar.txt", "U.txt", "V.txt", "Z_s.txt", "steady_row.txt"};
  write_manifest(d, m);

  print_matrix(log, "K", t.K);
  print_matrix(log, "P", t.P);
  print_matrix(log, "psi", t.psi);
  print_matrix(log, "D", s.compensation);
  log << "m_bar       " << cell(s.bound.m_bar[0]) << cell(s.bound.m_bar[1]) << "  ("
      << to_string(l.config.bound_mode) << ")\n";
  log << "V           [" << format_double(s.tracking_box.lower[0], 6) << ", "
      << format_double(s.tracking_box.upper[0], 6) << "] x [" << format_double(s.tracking_box.lower[1], 6)
      << ", " << format_double(s.tracking_box.upper[1], 6) << "]\n";
  log << "Z_s         (" << format_double(seg.first[0], 6) << ", " << format_double(seg.first[1], 6)
      << ") -- (" << format_double(seg.second[0], 6) << ", " << format_double(seg.second[1], 6) << ")\n";
  log << "lambda      " << format_double(t.lambda, 6) << "\n";
  log << "k*          " << t.determination_index << "  (" << t.x_a.rows() << " rows in X_a)\n";
  log << "DARE        " << t.dare_iterations << " iterations, residual "
      << format_double(t.dare_residual, 3) << "\n";
  log << "wrote bundle to " << d.string() << "\n";
}

void run_simulate(const RunRequest& req, std::ostream& log) {
  const Loaded l = load(req);
  ensure_dir(req.out);
  const ControlSetup s = build_setup(l.patient, l.config);
  Controller ctrl = s.make_controller();
  SimOptions opt;
  opt.duration = l.config.duration;
  opt.plant_substeps = l.config.plant_substeps;
  const SimLog sim = simulate_closed_loop(s.plant, ctrl, opt);

  {
    std::ofstream os(req.out / "simulation.csv");
    if (!os) throw ConfigError("cannot write simulation.csv");
    write_csv(os, sim, req.timing);
  }
  json outputs = {"simulation.csv"};
  if (req.svg) {
    for (const auto& f : write_simulation_plots(req.out, sim, l.config.mpc.y_ref)) outputs.push_back(f);
  }

  const Metrics met = compute_metrics(sim, l.config.mpc.y_ref, l.config.settling_band);
  long clamped = 0;
  for (const auto& r : sim.records) clamped += r.clamped ? 1 : 0;
  json m = base_manifest("simulate", req, l.config);
  json r;
  r["steps"] = sim.records.size();
  r["settling_time"] = std::isfinite(met.settling_time) ? json(met.settling_time) : json("inf");
  r["min_bis"] = met.undershoot;
  r["final_error"] = met.final_error;
  r["max_input_gap_after_settling"] = met.max_input_gap_after_settling;
  r["clamped_steps"] = clamped;
  m["results"] = r;
  m["outputs"] = outputs;
  write_manifest(req.out, m);

  const SimRecord& last = sim.records.back();
  log << "steps            " << sim.records.size() << " (Ts " << format_double(sim.ts, 6) << " s)\n";
  log << "settling time    "
      << (std::isfinite(met.settling_time) ? format_double(met.settling_time, 6) + " s" : std::string("never"))
      << " (band +/-" << format_double(l.config.settling_band, 6) << ")\n";
  log << "min BIS          " << format_double(met.undershoot, 6) << "\n";
  log << "final BIS        " << format_double(last.bis, 6) << "\n";
  log << "final v_a        " << format_double(last.v_a[0], 6) << ", " << format_double(last.v_a[1], 6) << "\n";
  if (clamped > 0) log << "warning: applied input clamped at " << clamped << " step(s)\n";
  log << "wrote " << (req.out / "simulation.csv").string() << "\n";
}

bool run_validate(const RunRequest& req, std::ostream& log) {
  const Loaded l = load(req);
  const ControlSetup s = build_setup(l.patient, l.config);
  ValidationOptions opt;
  opt.flip_compensation = req.flip_compensation;
  const ValidationReport rep = run_validation(s, opt);
  print_report(log, rep);
  if (!req.out.empty()) {
    ensure_dir(req.out);
    {
      std::ofstream os(req.out / "validation.txt");
      if (!os) throw ConfigError("cannot write validation.txt");
      print_report(os, rep);
    }
    json m = base_manifest("validate", req, l.config);
    m["parameters"]["flip_compensation"] = req.flip_compensation;
    json checks = json::array();
    for (const auto& c : rep.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    m["results"] = {{"passed", rep.passed()}, {"checks", checks}};
    m["outputs"] = {"validation.txt"};
    write_manifest(req.out, m);
  }
  return rep.passed();
}

void run_steady_set(const RunRequest& req, std::ostream& log) {
  const Loaded l = load(req);
  // Only what the steady set needs; terminal ingredients are not computed.
  const ControllerConfig& cfg = l.config;
  const ContinuousDynamics cont = build_continuous(l.patient.propofol, l.patient.remifentanil);
  const DiscreteDynamics dyn = discretize_euler(cont, cfg.ts);
  const DisturbanceBound bound = disturbance_bound(dyn, cfg.applied, cfg.bound_mode, cfg.m_bar);
  const InputBox V = tracking_input_set(cfg.applied, bound.m_bar);
  const SteadyOutputRow row = steady_output_row(dyn, l.patient.pd, cfg.mpc.y_ref);
  const SteadyInputSet zs = build_steady_input_set(row, V, cfg.mpc.epsilon);
  const auto [a, b] = steady_segment(zs);
  const Input best = offset_cost_minimizer(cfg.mpc.offset_cost, a, b);

  log << "steady line      " << format_double(zs.gain[0], 10) << " v_p + " << format_double(zs.gain[1], 10)
      << " v_r = " << format_double(zs.level, 10) << "\n";
  log << "endpoint a       " << format_double(a[0], 10) << ", " << format_double(a[1], 10) << "\n";
  log << "endpoint b       " << format_double(b[0], 10) << ", " << format_double(b[1], 10) << "\n";
  log << "offset-cost min  " << format_double(best[0], 10) << ", " << format_double(best[1], 10) << "\n";

  if (!req.out.empty()) {
    ensure_dir(req.out);
    Eigen::MatrixXd seg(3, 2);
    seg.row(0) = a.transpose();
    seg.row(1) = b.transpose();
    seg.row(2) = best.transpose();
    save_matrix(req.out / "steady_set.txt", seg);
    Eigen::MatrixXd r(1, 3);
    r << zs.gain, zs.level;
    save_matrix(req.out / "steady_row.txt", r);
    json m = base_manifest("steady-set", req, cfg);
    m["results"] = {{"endpoint_a", vec(a)}, {"endpoint_b", vec(b)}, {"offset_cost_minimizer", vec(best)}};
    m["outputs"] = {"steady_set.txt", "steady_row.txt"};
    write_manifest(req.out, m);
  }
}

}  // namespace anesmpc
