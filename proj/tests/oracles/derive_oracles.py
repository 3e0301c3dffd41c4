"""Independent reference values for the test suite.

Rebuilds the sample-patient model from the INI files with numpy/scipy and
solves one MPC problem with cvxpy, then writes tests/oracle_values.hpp.
Run from the repository root:

    python3 tests/oracles/derive_oracles.py

The MPC reference reads the terminal set from tests/data/X_a_sample.txt
(written by `anesmpc ingredients`), so it checks the QP transcription and
solver, not the invariant-set computation.
"""

import configparser
import pathlib

import cvxpy as cp
import numpy as np
import scipy.linalg as sla

ROOT = pathlib.Path(__file__).resolve().parents[2]


def read_ini(path):
    p = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    p.optionxform = str
    p.read(path)
    return p


def floats(s):
    return [float(t) for t in s.replace(",", " ").split()]


pat = read_ini(ROOT / "data/patient_f56_180cm_92kg.ini")
ctl = read_ini(ROOT / "data/controller.ini")

Ts = float(ctl["controller"]["Ts"])
N = int(ctl["controller"]["N"])
Q = np.diag(floats(ctl["controller"]["Q_diag"]))
R = np.diag(floats(ctl["controller"]["R_diag"]))
eps = float(ctl["controller"]["epsilon"])
y_ref = float(ctl["controller"]["y_ref"])
u_min = np.array(floats(ctl["controller"]["u_min"]))
u_max = np.array(floats(ctl["controller"]["u_max"]))
m_bar = np.array(floats(ctl["controller"]["m_bar"]))
vd_w = float(ctl["vd"]["weight"])
vd_d = np.array(floats(ctl["vd"]["direction"]))


def drug(name):
    s = pat[name]
    V1, V2, V3 = (float(s[k]) for k in ("V1", "V2", "V3"))
    Cl1, Cl2, Cl3, ke = (float(s[k]) / 60.0 for k in ("Cl1", "Cl2", "Cl3", "ke"))
    return dict(V1=V1, V2=V2, V3=V3, Cl1=Cl1, Cl2=Cl2, Cl3=Cl3, ke=ke,
                k10=Cl1 / V1, k12=Cl2 / V1, k13=Cl3 / V1, k21=Cl2 / V2, k31=Cl3 / V3)


P_, R_ = drug("propofol"), drug("remifentanil")
pd = {k: float(v) for k, v in pat["pd"].items()}

# Full 8-state model in the order (p1, p4, r1, r4, p2, p3, r2, r3).
A8 = np.zeros((8, 8))
B8 = np.zeros((8, 2))
for j, d in enumerate((P_, R_)):
    b, e, s2, s3 = 2 * j, 2 * j + 1, 4 + 2 * j, 5 + 2 * j
    A8[b, b] = -(d["k10"] + d["k12"] + d["k13"])
    A8[b, s2], A8[b, s3] = d["k12"], d["k13"]
    A8[e, b], A8[e, e] = d["ke"], -d["ke"]
    A8[s2, b], A8[s2, s2] = d["k21"], -d["k21"]
    A8[s3, b], A8[s3, s3] = d["k31"], -d["k31"]
    B8[b, j] = 1.0 / d["V1"]

Af, As, B = A8[:4, :4], A8[:4, 4:], B8[:4]
Afd, Bd = np.eye(4) + Ts * Af, Ts * B
A8d, B8d = np.eye(8) + Ts * A8, Ts * B8

# compensation gain by generic least squares
D = -np.linalg.lstsq(B, As, rcond=None)[0]

# DARE
Pdare = sla.solve_discrete_are(Afd, Bd, Q, R)
K = -np.linalg.solve(R + Bd.T @ Pdare @ Bd, Bd.T @ Pdare @ Afd)

# disturbance bounds
x_eq = np.linalg.solve(-A8, B8 @ u_max)
m_wc = np.abs(D @ x_eq[4:])
x = np.zeros(8)
m_sim = np.zeros(2)
for _ in range(10**6):
    nx = A8d @ x + B8d @ u_max
    m_sim = np.maximum(m_sim, np.abs(D @ nx[4:]))
    if np.max(np.abs(nx - x)) <= 1e-9:
        x = nx
        break
    x = nx

# steady output line
G = np.array([0, 1 / pd["Ce50p"], 0, 1 / pd["Ce50r"]])
S = np.linalg.solve(np.eye(4) - Afd, Bd)
g_eff = G @ S
c = ((pd["E0"] - y_ref) / (pd["Emax"] - pd["E0"] + y_ref)) ** (1 / pd["gamma"])
V_lo, V_hi = u_min + m_bar, u_max
lo, hi = V_lo + eps, V_hi - eps


def clip_line(g, c, lo, hi):
    # brute force: intersect the line with each box edge, keep points inside
    pts = []
    for i in range(2):
        for b in (lo[i], hi[i]):
            o = 1 - i
            v = np.zeros(2)
            v[i] = b
            v[o] = (c - g[i] * b) / g[o]
            if lo[o] - 1e-12 <= v[o] <= hi[o] + 1e-12:
                pts.append(v)
    pts.sort(key=lambda p: p[0], reverse=True)
    return pts[0], pts[-1]


za, zb = clip_line(g_eff, c, lo, hi)
t = cp.Variable()
vd_seg = cp.Minimize(vd_w * cp.square(vd_d @ (za + t * (zb - za))))
cp.Problem(vd_seg, [t >= 0, t <= 1]).solve()
v_opt = za + float(t.value) * (zb - za)

# one MPC solve from x = 0 with the terminal set from the bundle
xa_file = ROOT / "tests/data/X_a_sample.txt"
tok = xa_file.read_text().split()
n, k = int(tok[0]), int(tok[1])
vals = np.array([float(s) for s in tok[2:]])
F = vals[: n * k].reshape(k, n)
g = vals[n * k:]

v = cp.Variable((N, 2))
va = cp.Variable(2)
xa = S @ va
xs = [np.zeros(4)]
cost = 0
for kk in range(N):
    cost += cp.quad_form(xs[-1] - xa, Q) + cp.quad_form(v[kk] - va, R)
    xs.append(Afd @ xs[-1] + Bd @ v[kk])
cost += cp.quad_form(xs[-1] - xa, Pdare) + vd_w * cp.square(vd_d @ va)
cons = [v >= np.tile(V_lo, (N, 1)), v <= np.tile(V_hi, (N, 1)), g_eff @ va == c,
        va >= lo, va <= hi, F @ cp.hstack([xs[-1], va]) <= g]
prob = cp.Problem(cp.Minimize(cost), cons)
prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-12, tol_gap_rel=1e-12, tol_feas=1e-12)
assert prob.status == "optimal", prob.status

# degenerate LP that once tripped the ratio test
def read_poly(path):
    t = path.read_text().split()
    n, k = int(t[0]), int(t[1])
    vals = np.array([float(x) for x in t[2:]])
    return vals[: n * k].reshape(k, n), vals[n * k:]


from scipy.optimize import linprog

Freg, greg = read_poly(ROOT / "tests/data/lp_regression_polyhedron.txt")
creg = np.array([float(x) for x in (ROOT / "tests/data/lp_regression_objective.txt").read_text().split()[2:]])
lp = linprog(-creg, A_ub=Freg, b_ub=greg, bounds=[(None, None)] * len(creg), method="highs")
assert lp.status == 0
lp_value = -lp.fun


def arr(a):
    a = np.atleast_1d(np.asarray(a, dtype=float)).ravel()
    return "{" + ", ".join(f"{x:.17g}" for x in a) + "}"


out = f"""#pragma once

// Reference values from tests/oracles/derive_oracles.py (numpy, scipy,
// cvxpy). Regenerate with that script; do not edit by hand.

namespace oracle {{

// sample patient, Ts = {Ts:g} s, Q = diag(1, 10, 1, 10), R = I
inline constexpr double kAfd[16] = {arr(Afd)};
inline constexpr double kBd[8] = {arr(Bd)};
inline constexpr double kD[8] = {arr(D)};
inline constexpr double kK[8] = {arr(K)};
inline constexpr double kP[16] = {arr(Pdare)};
inline constexpr double kSteadyMap[8] = {arr(S)};
inline constexpr double kGeff[2] = {arr(g_eff)};
inline constexpr double kLevel = {c:.17g};
inline constexpr double kMbarWorstCase[2] = {arr(m_wc)};
inline constexpr double kMbarSimulated[2] = {arr(m_sim)};
inline constexpr double kEquilibriumAtUmax[8] = {arr(x_eq)};
inline constexpr double kSegmentA[2] = {arr(za)};
inline constexpr double kSegmentB[2] = {arr(zb)};
inline constexpr double kOffsetMinimizer[2] = {arr(v_opt)};

// MPC from x = 0 (terminal set tests/data/X_a_sample.txt)
inline constexpr double kMpcCost = {prob.value:.17g};
inline constexpr double kMpcV0[2] = {arr(v.value[0])};
inline constexpr double kMpcVa[2] = {arr(va.value)};

// max c'w over tests/data/lp_regression_*.txt
inline constexpr double kLpRegressionValue = {lp_value:.17g};

}}  // namespace oracle
"""
(ROOT / "tests/oracle_values.hpp").write_text(out)
print(out)
