#pragma once

// Subcommand bodies: read configs, compute, write an output bundle plus a
// manifest.json. Errors surface as ConfigError / ModelError /
// InfeasibleError; validation failure is reported through the return value.

#include "anesmpc/problem.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace anesmpc {

struct RunRequest {
  std::filesystem::path patient;
  std::filesystem::path config;
  std::filesystem::path out;  // empty: nothing written (validate, steady-set)
  std::optional<double> duration;
  bool svg = false;
  bool timing = false;        // real solve times in the CSV (not reproducible)
  bool flip_compensation = false;
};

/// K, P, psi, A_w, W_lambda, X_a, D, m_bar, U, V, Z_s into req.out.
void run_ingredients(const RunRequest& req, std::ostream& log);

/// Closed loop; writes simulation.csv (and SVG plots) into req.out.
void run_simulate(const RunRequest& req, std::ostream& log);

/// Property suite; returns true iff every check passed.
bool run_validate(const RunRequest& req, std::ostream& log);

/// Steady-input segment for y_ref and the offset-cost minimizer on it.
void run_steady_set(const RunRequest& req, std::ostream& log);

/// Minimizer of the offset cost over the segment between a and b.
Input offset_cost_minimizer(const OffsetCost& cost, const Input& a, const Input& b);

}  // namespace anesmpc
