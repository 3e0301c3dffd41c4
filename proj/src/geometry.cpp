#include "anesmpc/geometry.hpp"

#include "anesmpc/errors.hpp"
#include "anesmpc/text_matrix.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace anesmpc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Polyhedron::Polyhedron(MatrixXd F_in, VectorXd g_in) : F(std::move(F_in)), g(std::move(g_in)) {
  if (F.rows() != g.size()) throw ConfigError("polyhedron: F rows and g length differ");
  if (!F.allFinite() || !g.allFinite()) throw ConfigError("polyhedron: non-finite entry");
}

Polyhedron Polyhedron::intersect(const Polyhedron& other) const {
  if (other.dim() != dim()) throw ConfigError("polyhedron: dimension mismatch in intersect");
  MatrixXd f(rows() + other.rows(), dim());
  VectorXd h(rows() + other.rows());
  f << F, other.F;
  h << g, other.g;
  return Polyhedron(std::move(f), std::move(h));
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "unknown";
}

namespace {

// Dense tableau for  min cost^T y  s.t.  T y = rhs, y >= 0  where the last
// `m` columns are artificial identity columns.
// 0 for empty vectors, where maxCoeff is undefined.
double max_abs(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

class DualTableau {
 public:
  DualTableau(const VectorXd& c, const Polyhedron& P, const LpSettings& s)
      : s_(s), m_(P.dim()), k_(P.rows()), t_(m_, k_ + m_), rhs_(m_),
        sign_(m_), basis_(m_), dead_(m_, false), reduced_(k_ + m_) {
    t_.setZero();
    for (Index i = 0; i < m_; ++i) {
      sign_[i] = c[i] < 0.0 ? -1.0 : 1.0;
      t_.row(i).head(k_) = sign_[i] * P.F.col(i).transpose();
      t_(i, k_ + i) = 1.0;
      rhs_[i] = sign_[i] * c[i];
      basis_[i] = k_ + i;
    }
    cap_ = 50 * static_cast<int>(k_ + m_) + 1000;
  }

  // Phase 1: minimize the sum of artificials. Returns the residual infeasibility.
  double phase_one() {
    VectorXd cost = VectorXd::Zero(k_ + m_);
    cost.tail(m_).setOnes();
    price(cost);
    run(nullptr);
    double infeas = 0.0;
    for (Index i = 0; i < m_; ++i)
      if (basis_[i] >= k_) infeas += rhs_[i];
    return infeas;
  }

  // Pivot remaining zero-level artificials out of the basis; rows that cannot
  // be pivoted are linearly dependent and are retired.
  void expel_artificials() {
    for (Index i = 0; i < m_; ++i) {
      if (basis_[i] < k_) continue;
      Index best = -1;
      double mag = s_.pivot_tol;
      for (Index j = 0; j < k_; ++j) {
        if (std::abs(t_(i, j)) > mag) {
          mag = std::abs(t_(i, j));
          best = j;
        }
      }
      if (best >= 0) {
        pivot(i, best);
      } else {
        dead_[i] = true;
      }
    }
  }

  // Phase 2 on cost g. Returns the entering column of an unbounded ray or -1.
  Index phase_two(const VectorXd& g) {
    VectorXd cost = VectorXd::Zero(k_ + m_);
    cost.head(k_) = g;
    price(cost);
    return run(&g);
  }

  // Primal maximizer from the simplex multipliers: pi_i = -reduced(artificial i).
  VectorXd multipliers() const {
    VectorXd w(m_);
    for (Index i = 0; i < m_; ++i) w[i] = -sign_[i] * reduced_[k_ + i];
    return w;
  }

  VectorXd ray(Index entering) const {
    VectorXd y = VectorXd::Zero(k_);
    y[entering] = 1.0;
    for (Index i = 0; i < m_; ++i)
      if (!dead_[i] && basis_[i] < k_) y[basis_[i]] = -t_(i, entering);
    return y;
  }

  int iterations() const { return iterations_; }

 private:
  void price(const VectorXd& cost) {
    reduced_ = cost;
    for (Index i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb != 0.0) reduced_ -= cb * t_.row(i).transpose();
    }
  }

  // Bland's rule simplex. Returns -1 at optimality or the entering column
  // when the ratio test finds no blocking row. Phase one (g == nullptr) is
  // bounded below, so a column without a usable pivot there is numerical
  // noise and is skipped instead.
  Index run(const VectorXd* g) {
    const double opt_tol =
        s_.optimality_tol * (g ? std::max(1.0, max_abs(*g)) : 1.0);
    std::vector<bool> skip(static_cast<std::size_t>(k_), false);
    for (int it = 0; it < cap_; ++it) {
      Index enter = -1;
      for (Index j = 0; j < k_; ++j) {
        if (!skip[static_cast<std::size_t>(j)] && reduced_[j] < -opt_tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return -1;

      Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m_; ++i) {
        if (dead_[i]) continue;
        const double a = t_(i, enter);
        if (a <= s_.pivot_tol) continue;
        const double ratio = std::max(rhs_[i], 0.0) / a;
        const double slack = leave < 0 ? 0.0 : 1e-14 * std::max(1.0, best);
        if (leave < 0 || ratio < best - slack ||
            (ratio <= best + slack && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) {
        if (g) return enter;
        skip[static_cast<std::size_t>(enter)] = true;
        continue;
      }
      pivot(leave, enter);
      ++iterations_;
    }
    throw ModelError("LP iteration cap reached (possible cycling)");
  }

  void pivot(Index r, Index c) {
    const double p = t_(r, c);
    t_.row(r) /= p;
    rhs_[r] /= p;
    for (Index i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) {
        t_.row(i) -= f * t_.row(r);
        rhs_[i] -= f * rhs_[r];
        t_(i, c) = 0.0;
      }
    }
    const double rc = reduced_[c];
    if (rc != 0.0) {
      reduced_ -= rc * t_.row(r).transpose();
      reduced_[c] = 0.0;
    }
    basis_[r] = c;
  }

  LpSettings s_;
  Index m_;  // primal dimension = dual equality rows
  Index k_;  // primal rows = dual variables
  MatrixXd t_;
  VectorXd rhs_;
  VectorXd sign_;
  std::vector<Index> basis_;
  std::vector<bool> dead_;
  VectorXd reduced_;
  int cap_ = 0;
  int iterations_ = 0;
};

}  // namespace

LpResult lp_max(const VectorXd& c, const Polyhedron& P, const LpSettings& settings) {
  if (c.size() != P.dim()) throw ConfigError("lp_max: objective dimension mismatch");
  LpResult out;
  DualTableau tab(c, P, settings);

  const double infeas = tab.phase_one();
  if (infeas > settings.feasibility_tol * std::max(1.0, max_abs(c))) {
    // Dual infeasible: the primal is unbounded or empty.
    if (c.isZero(0.0)) throw ModelError("lp_max: phase one failed on zero objective");
    const LpResult feas = lp_max(VectorXd::Zero(P.dim()), P, settings);
    out.status = feas.status == LpStatus::Optimal ? LpStatus::Unbounded : LpStatus::Infeasible;
    out.farkas = feas.farkas;
    out.iterations = tab.iterations() + feas.iterations;
    if (out.status == LpStatus::Unbounded) {
      out.value = std::numeric_limits<double>::infinity();
      out.argmax = feas.argmax;
    }
    return out;
  }
  tab.expel_artificials();
  const Index ray_col = tab.phase_two(P.g);
  out.iterations = tab.iterations();
  if (ray_col >= 0) {
    out.status = LpStatus::Infeasible;
    out.farkas = tab.ray(ray_col);
    return out;
  }
  out.status = LpStatus::Optimal;
  out.argmax = tab.multipliers();
  out.value = c.dot(out.argmax);
  return out;
}

bool is_feasible(const Polyhedron& P) {
  return lp_max(VectorXd::Zero(P.dim()), P).status == LpStatus::Optimal;
}

Polyhedron remove_redundant(const Polyhedron& P, double tol) {
  if (!is_feasible(P)) throw ModelError("remove_redundant: polyhedron is empty");
  const Index k = P.rows();
  std::vector<bool> keep(static_cast<std::size_t>(k), true);
  for (Index j = 0; j < k; ++j) {
    std::vector<Index> others;
    others.reserve(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i)
      if (i != j && keep[static_cast<std::size_t>(i)]) others.push_back(i);
    Polyhedron rest(P.F(others, Eigen::all), P.g(others));
    const LpResult r = lp_max(P.F.row(j).transpose(), rest);
    if (r.status == LpStatus::Optimal && r.value <= P.g[j] + tol) {
      keep[static_cast<std::size_t>(j)] = false;
    }
  }
  std::vector<Index> kept;
  for (Index i = 0; i < k; ++i)
    if (keep[static_cast<std::size_t>(i)]) kept.push_back(i);
  return Polyhedron(P.F(kept, Eigen::all), P.g(kept));
}

bool contains(const Polyhedron& P, const VectorXd& w, double tol) {
  if (w.size() != P.dim()) throw ConfigError("contains: dimension mismatch");
  if (P.rows() == 0) return true;
  return ((P.F * w - P.g).array() <= tol).all();
}

void write_polyhedron(std::ostream& os, const Polyhedron& P) {
  os << P.dim() << ' ' << P.rows() << '\n';
  for (Index i = 0; i < P.rows(); ++i) {
    for (Index j = 0; j < P.dim(); ++j) {
      if (j) os << ' ';
      os << format_double(P.F(i, j));
    }
    os << '\n';
  }
  for (Index i = 0; i < P.rows(); ++i) {
    if (i) os << ' ';
    os << format_double(P.g[i]);
  }
  os << '\n';
}

Polyhedron read_polyhedron(std::istream& is) {
  long long n = -1, k = -1;
  if (!(is >> n >> k) || n < 0 || k < 0) throw ConfigError("polyhedron file: bad header");
  MatrixXd F(k, n);
  VectorXd g(k);
  std::string tok;
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < n; ++j) {
      if (!(is >> tok)) throw ConfigError("polyhedron file truncated");
      F(i, j) = parse_double(tok);
    }
  for (Index i = 0; i < k; ++i) {
    if (!(is >> tok)) throw ConfigError("polyhedron file truncated");
    g[i] = parse_double(tok);
  }
  return Polyhedron(std::move(F), std::move(g));
}

void save_polyhedron(const std::filesystem::path& path, const Polyhedron& P) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  write_polyhedron(os, P);
}

Polyhedron load_polyhedron(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path.string());
  return read_polyhedron(is);
}

}  // namespace anesmpc

namespace anesmpc {

BoundingBox bounding_box(const Polyhedron& P) {
  const Index n = P.dim();
  BoundingBox box{VectorXd(n), VectorXd(n)};
  for (Index i = 0; i < n; ++i) {
    VectorXd c = VectorXd::Zero(n);
    c[i] = 1.0;
    const LpResult hi = lp_max(c, P);
    const LpResult lo = lp_max(-c, P);
    if (hi.status != LpStatus::Optimal || lo.status != LpStatus::Optimal) {
      throw ModelError(std::string("bounding_box: polyhedron is ") +
                       (hi.status == LpStatus::Infeasible ? "empty" : "unbounded"));
    }
    box.upper[i] = hi.value;
    box.lower[i] = -lo.value;
  }
  return box;
}

std::vector<VectorXd> hit_and_run(const Polyhedron& P, const VectorXd& start, int count,
                                  std::mt19937_64& rng, int burn_in, int thin) {
  if (!contains(P, start, 0.0)) throw ModelError("hit_and_run: start point outside polyhedron");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  VectorXd w = start;
  std::vector<VectorXd> out;
  out.reserve(static_cast<std::size_t>(count));
  const long total = static_cast<long>(burn_in) + static_cast<long>(count) * thin;
  for (long step = 0; step < total; ++step) {
    VectorXd d(P.dim());
    for (Index i = 0; i < d.size(); ++i) d[i] = normal(rng);
    d.normalize();
    const VectorXd slack = P.g - P.F * w;
    const VectorXd rate = P.F * d;
    double t_lo = -std::numeric_limits<double>::infinity();
    double t_hi = std::numeric_limits<double>::infinity();
    for (Index r = 0; r < P.rows(); ++r) {
      const double s = std::max(slack[r], 0.0);
      if (rate[r] > 1e-300) t_hi = std::min(t_hi, s / rate[r]);
      else if (rate[r] < -1e-300) t_lo = std::max(t_lo, s / rate[r]);
    }
    if (!std::isfinite(t_lo) || !std::isfinite(t_hi)) {
      throw ModelError("hit_and_run: polyhedron is unbounded");
    }
    w += (t_lo + (t_hi - t_lo) * unit(rng)) * d;
    if (step >= burn_in && (step - burn_in) % thin == thin - 1) out.push_back(w);
  }
  return out;
}

}  // namespace anesmpc
