#include "anesmpc/config.hpp"

#include "anesmpc/errors.hpp"
#include "anesmpc/text_matrix.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <set>
#include <string>
#include <vector>

namespace anesmpc {

namespace pt = boost::property_tree;

namespace {

constexpr double kPerMinute = 1.0 / 60.0;

pt::ptree read_ini(std::istream& is) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return tree;
}

void reject_unknown(const pt::ptree& tree, const std::set<std::string>& sections,
                    const std::string& where) {
  for (const auto& [name, sub] : tree) {
    if (!sections.count(name)) throw ConfigError(where + ": unknown section [" + name + "]");
  }
}

void reject_unknown_keys(const pt::ptree& section, const std::string& name,
                         const std::set<std::string>& keys) {
  for (const auto& [key, value] : section) {
    if (!keys.count(key)) throw ConfigError("unknown key '" + key + "' in [" + name + "]");
  }
}

const pt::ptree& section(const pt::ptree& tree, const std::string& name) {
  const auto it = tree.find(name);
  if (it == tree.not_found()) throw ConfigError("missing section [" + name + "]");
  return it->second;
}

std::vector<double> numbers(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::string token;
  auto flush = [&] {
    if (!token.empty()) {
      try {
        out.push_back(parse_double(token));
      } catch (const ConfigError&) {
        throw ConfigError("key '" + key + "': not a number: '" + token + "'");
      }
      token.clear();
    }
  };
  for (char ch : text) {
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == '(' || ch == ')') {
      flush();
    } else {
      token.push_back(ch);
    }
  }
  flush();
  return out;
}

double scalar(const pt::ptree& sec, const std::string& key) {
  const auto v = sec.get_optional<std::string>(key);
  if (!v) throw ConfigError("missing key '" + key + "'");
  const auto n = numbers(*v, key);
  if (n.size() != 1) throw ConfigError("key '" + key + "' expects one number");
  return n[0];
}

double scalar_or(const pt::ptree& sec, const std::string& key, double fallback) {
  return sec.count(key) ? scalar(sec, key) : fallback;
}

template <int N>
Eigen::Matrix<double, N, 1> vector_or(const pt::ptree& sec, const std::string& key,
                                      const Eigen::Matrix<double, N, 1>& fallback) {
  if (!sec.count(key)) return fallback;
  const auto n = numbers(sec.get<std::string>(key), key);
  if (static_cast<int>(n.size()) != N) {
    throw ConfigError("key '" + key + "' expects " + std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) out[i] = n[static_cast<std::size_t>(i)];
  return out;
}

DrugPkParams read_drug(const pt::ptree& tree, const std::string& name) {
  const pt::ptree& s = section(tree, name);
  reject_unknown_keys(s, name, {"V1", "V2", "V3", "Cl1", "Cl2", "Cl3", "ke"});
  DrugPkParams p;
  p.V1 = scalar(s, "V1");
  p.V2 = scalar(s, "V2");
  p.V3 = scalar(s, "V3");
  p.Cl1 = scalar(s, "Cl1") * kPerMinute;
  p.Cl2 = scalar(s, "Cl2") * kPerMinute;
  p.Cl3 = scalar(s, "Cl3") * kPerMinute;
  p.ke = scalar(s, "ke") * kPerMinute;
  p.validate(name);
  return p;
}

bool boolean(const pt::ptree& sec, const std::string& key, bool fallback) {
  const auto v = sec.get_optional<std::string>(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError("key '" + key + "' expects a boolean");
}

}  // namespace

PatientConfig parse_patient(std::istream& is) {
  const pt::ptree tree = read_ini(is);
  reject_unknown(tree, {"propofol", "remifentanil", "pd"}, "patient file");
  PatientConfig cfg;
  cfg.propofol = read_drug(tree, "propofol");
  cfg.remifentanil = read_drug(tree, "remifentanil");
  const pt::ptree& pd = section(tree, "pd");
  reject_unknown_keys(pd, "pd", {"E0", "Emax", "gamma", "Ce50p", "Ce50r"});
  cfg.pd.E0 = scalar(pd, "E0");
  cfg.pd.Emax = scalar(pd, "Emax");
  cfg.pd.gamma = scalar(pd, "gamma");
  cfg.pd.Ce50p = scalar(pd, "Ce50p");
  cfg.pd.Ce50r = scalar(pd, "Ce50r");
  cfg.pd.validate();
  return cfg;
}

PatientConfig load_patient(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open patient file " + path.string());
  return parse_patient(is);
}

ControllerConfig parse_controller_config(std::istream& is) {
  const pt::ptree tree = read_ini(is);
  reject_unknown(tree, {"controller", "vd", "simulation"}, "controller config");
  ControllerConfig cfg;
  const pt::ptree empty;
  const pt::ptree& c = tree.count("controller") ? section(tree, "controller") : empty;
  reject_unknown_keys(c, "controller",
                      {"N", "Ts", "Q_diag", "R_diag", "epsilon", "lambda", "y_ref", "u_min",
                       "u_max", "disturbance_bound_mode", "m_bar"});
  const double horizon = scalar_or(c, "N", cfg.mpc.horizon);
  if (horizon != std::floor(horizon) || horizon < 1) throw ConfigError("N must be a positive integer");
  cfg.mpc.horizon = static_cast<int>(horizon);
  cfg.ts = scalar_or(c, "Ts", cfg.ts);
  cfg.mpc.Q = vector_or<4>(c, "Q_diag", cfg.mpc.Q.diagonal()).asDiagonal();
  cfg.mpc.R = vector_or<2>(c, "R_diag", cfg.mpc.R.diagonal()).asDiagonal();
  cfg.mpc.epsilon = scalar_or(c, "epsilon", cfg.mpc.epsilon);
  cfg.mpc.lambda = scalar_or(c, "lambda", cfg.mpc.lambda);
  cfg.mpc.y_ref = scalar_or(c, "y_ref", cfg.mpc.y_ref);
  cfg.applied.lower = vector_or<2>(c, "u_min", cfg.applied.lower);
  cfg.applied.upper = vector_or<2>(c, "u_max", cfg.applied.upper);
  if ((cfg.applied.lower.array() > cfg.applied.upper.array()).any()) {
    throw ConfigError("u_min must not exceed u_max");
  }
  if (const auto mode = c.get_optional<std::string>("disturbance_bound_mode")) {
    cfg.bound_mode = parse_disturbance_bound_mode(*mode);
  }
  if (c.count("m_bar")) cfg.m_bar = vector_or<2>(c, "m_bar", Input::Zero());
  if (cfg.bound_mode == DisturbanceBoundMode::Fixed && !cfg.m_bar) {
    throw ConfigError("disturbance_bound_mode = fixed requires m_bar");
  }

  if (tree.count("vd")) {
    const pt::ptree& v = section(tree, "vd");
    reject_unknown_keys(v, "vd", {"weight", "direction", "offset", "linear"});
    OffsetCost& vd = cfg.mpc.offset_cost;
    vd.weight = scalar_or(v, "weight", vd.weight);
    vd.direction = vector_or<2>(v, "direction", vd.direction);
    vd.offset = scalar_or(v, "offset", vd.offset);
    vd.linear = vector_or<2>(v, "linear", vd.linear);
  }
  if (tree.count("simulation")) {
    const pt::ptree& s = section(tree, "simulation");
    reject_unknown_keys(s, "simulation", {"duration", "settling_band", "plant_substeps"});
    cfg.duration = scalar_or(s, "duration", cfg.duration);
    cfg.settling_band = scalar_or(s, "settling_band", cfg.settling_band);
    cfg.plant_substeps = boolean(s, "plant_substeps", cfg.plant_substeps);
  }
  if (!(cfg.ts > 0.0)) throw ConfigError("Ts must be > 0");
  if (!(cfg.settling_band > 0.0)) throw ConfigError("settling_band must be > 0");
  cfg.mpc.validate();
  return cfg;
}

ControllerConfig load_controller_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open controller config " + path.string());
  return parse_controller_config(is);
}

}  // namespace anesmpc
