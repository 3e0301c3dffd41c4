#pragma once

// H-representation polyhedra {w : F w <= g} and the small dense LP engine
// used for redundancy elimination and invariant-set termination tests.

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <random>
#include <vector>

namespace anesmpc {

struct Polyhedron {
  Eigen::MatrixXd F;
  Eigen::VectorXd g;

  Polyhedron() = default;
  /// Throws ConfigError on size mismatch or non-finite entries.
  Polyhedron(Eigen::MatrixXd F, Eigen::VectorXd g);

  Eigen::Index dim() const { return F.cols(); }
  Eigen::Index rows() const { return F.rows(); }

  /// Row-wise concatenation; both operands must share the dimension.
  Polyhedron intersect(const Polyhedron& other) const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus status);

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
  Eigen::VectorXd argmax;
  /// On Infeasible: y >= 0 with F^T y = 0 and g^T y < 0.
  Eigen::VectorXd farkas;
  int iterations = 0;
};

struct LpSettings {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-10;
  double pivot_tol = 1e-11;
};

/// max c^T w over P. Solved through the dual standard-form LP
///   min g^T y  s.t.  F^T y = c, y >= 0
/// with a two-phase tableau simplex under Bland's rule; the primal maximizer
/// is read off the simplex multipliers. Throws ModelError at the iteration cap.
LpResult lp_max(const Eigen::VectorXd& c, const Polyhedron& P,
                const LpSettings& settings = {});

/// True when P has at least one point.
bool is_feasible(const Polyhedron& P);

/// Single deterministic pass in row order: row j is dropped iff
/// max F_j w over the currently surviving rows (excluding j) is <= g_j + tol.
/// Throws ModelError if P is empty.
Polyhedron remove_redundant(const Polyhedron& P, double tol = 1e-9);

bool contains(const Polyhedron& P, const Eigen::VectorXd& w, double tol = 1e-9);

/// Text format: "n k" header, k rows of F, then g on one line; 17 digits.
void write_polyhedron(std::ostream& os, const Polyhedron& P);
Polyhedron read_polyhedron(std::istream& is);
void save_polyhedron(const std::filesystem::path& path, const Polyhedron& P);
Polyhedron load_polyhedron(const std::filesystem::path& path);

/// Axis-aligned bounding box of P via 2n LPs; throws ModelError if P is
/// empty or unbounded.
struct BoundingBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};
BoundingBox bounding_box(const Polyhedron& P);

/// Hit-and-run random walk inside a bounded P starting from an interior point.
/// Returns `count` samples taken every `thin` moves after `burn_in` moves.
std::vector<Eigen::VectorXd> hit_and_run(const Polyhedron& P, const Eigen::VectorXd& start,
                                         int count, std::mt19937_64& rng,
                                         int burn_in = 200, int thin = 10);

}  // namespace anesmpc
