"""Desk-scale verification suite: one check per acceptance criterion.

Each check returns a ``Check`` with the measured quantities and the
tolerance it was held to.  ``run_all`` drives the ``verify-all`` command and
the acceptance tests.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .derivatives import distortion, wirtinger
from .exact import (K_DIFF, SQRT2, ExactMapId, MapKind, composed_bound, eval_exact, exact_pair,
                    invert_exact, k_f, k_g, sample_exact)
from .fields import SampledField, annulus, l2_norm, make_grid, region_mask, sample_map
from .kirszbraun import build_field, counterexample_k0, lipschitz_audit, minimax_center
from .solvers import (PathGamma, affine_fixed_point, affine_solution, build_flow,
                      change_of_variables, residual, solve_inhomogeneous)
from .structures import (ClosedFormBeltrami, KirszbraunBeltrami, windowed_linear,
                         segment_distance_structure)
from .topology import (argument_increment, check_flow_conditions, circle_trace,
                       growth_exponent, modulus_crossing, winding_number)
from .transforms import beurling


@dataclass
class Check:
    number: int
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        summary = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items()
                            if not isinstance(v, (list, dict)))
        return f"[{status}] {self.number:2d}. {self.name}: {summary}"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def threshold_identity() -> Check:
    k = 3 - 2 * SQRT2
    val = composed_bound(k)
    err = abs(val - 1 / 3)
    return Check(1, "threshold identity 2k/(1+k^2) = 1/3", err <= 1e-14,
                 {"k": k, "value": val, "error": err, "tol": 1e-14})


def counterexample_witness(t: float = 0.1, R: float = 8.0, n: int = 256, m: int = 41,
                           stride: int = 64) -> Check:
    grid = make_grid(0, R, n)
    f = ExactMapId(MapKind.f_t, t=t)
    g = ExactMapId(MapKind.g_t, t=t)
    k_audit = max(k_f(t), k_g(t)) + 1e-9
    lattice = grid.lattice()
    zs = list(lattice[stride // 2::stride, stride // 2::stride].ravel())
    zs += [0.5 + 0j, 0.5 + 0.5j, 1.0 + 0j, 2.0 + 0j, -3.0 + 2.0j, 7.5 + 0j]
    worst, worst_z, worst_s0 = 0.0, None, 0.0
    for z in zs:
        table = build_field(z, t, counterexample_k0(t), m=m)
        ratio, _ = lipschitz_audit(table)
        worst_s0 = max(worst_s0, table.max_s0)
        if ratio > worst:
            worst, worst_z = ratio, complex(z)
    H = KirszbraunBeltrami(t)
    res_f = residual(H, sample_exact(f, grid), exact_pair(f, grid))
    res_g = residual(H, sample_exact(g, grid), exact_pair(g, grid))
    sep = float(np.max(np.abs(eval_exact(f, lattice) - eval_exact(g, lattice))))
    norm = [abs(eval_exact(f, 0.0)), abs(eval_exact(f, 1.0) - 1), abs(eval_exact(g, 0.0)),
            abs(eval_exact(g, 1.0) - 1)]
    passed = (worst <= k_audit and res_f.sup <= 1e-9 and res_g.sup <= 1e-9 and sep > 0.01
              and max(norm) == 0.0)
    return Check(2, "counterexample witness (two normalized solutions)", passed,
                 {"audit_max_ratio": worst, "k_audit": k_audit, "worst_z": worst_z,
                  "tables": len(zs), "table_size": len(table.values), "max_s0": worst_s0,
                  "residual_f_sup": res_f.sup, "residual_g_sup": res_g.sup,
                  "sup_f_minus_g": sep, "normalization_error": max(norm)})


def distortion_constants(t: float = 0.1, R: float = 8.0) -> Check:
    f = ExactMapId(MapKind.f_t, t=t)
    g = ExactMapId(MapKind.g_t, t=t)
    refs = {"f_t": k_f(t), "g_t": k_g(t), "f_t-g_t": K_DIFF}
    measured, passed = {}, True
    for n, tol in ((256, 0.02), (512, 0.005)):
        grid = make_grid(0, R, n)
        fs, gs = sample_exact(f, grid), sample_exact(g, grid)
        for name, field_ in (("f_t", fs), ("g_t", gs), ("f_t-g_t", fs - gs)):
            sup = distortion(wirtinger(field_), annulus(1.0, R)).sup_k
            rel = abs(sup - refs[name]) / refs[name]
            measured[f"{name}@{n}_rel_err"] = rel
            passed &= rel <= tol
    measured.update({f"ref_{k}": v for k, v in refs.items()})
    return Check(3, "distortion constants k_f, k_g, 3-2sqrt2", passed, measured)


def growth_criterion(t: float = 0.1, m: int = 4096) -> Check:
    f = ExactMapId(MapKind.f_t, t=t)
    g = ExactMapId(MapKind.g_t, t=t)
    fit = growth_exponent(lambda z: eval_exact(f, z) - eval_exact(g, z), [1e1, 1e2, 1e3, 1e4], m)
    err = abs(fit.alpha - SQRT2)
    return Check(4, "growth exponent of f_t - g_t equals sqrt2 +- 0.01", err <= 0.01,
                 {"alpha": fit.alpha, "error": err, "tol": 0.01, "fit_residual": fit.residual,
                  "last_local_slope": fit.local_slopes[-1], "local_slopes": fit.local_slopes})


def beurling_identity(R: float = 8.0, n: int = 256, seed: int = 0) -> Check:
    grid = make_grid(0, R, n)
    z = grid.lattice()
    sigma = R / 8
    phi = np.exp(-np.abs(z) ** 2 / (2 * sigma**2))
    d_phi = -np.conj(z) / (2 * sigma**2) * phi
    dbar_phi = -z / (2 * sigma**2) * phi
    S = beurling(SampledField(grid, dbar_phi, "dbar bump")).values
    rel = l2_norm(S - d_phi, grid) / l2_norm(d_phi, grid)
    rng = np.random.default_rng(seed)
    w = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    w -= w.mean()
    iso = abs(l2_norm(beurling(SampledField(grid, w)).values, grid) - l2_norm(w, grid)) / l2_norm(w, grid)
    return Check(5, "Beurling identity S(dbar phi) = d phi and L2 isometry",
                 rel < 1e-6 and iso <= 1e-12, {"bump_rel_err": rel, "isometry_rel_err": iso})


def solver_contraction(R: float = 8.0, n: int = 256, gamma: complex = 1.0) -> Check:
    grid = make_grid(0, R, n)
    H = windowed_linear(0.3, R)
    sup_mu = float(np.max(np.abs(H.mu(grid.lattice()))))
    sol = solve_inhomogeneous(H, gamma, grid, tol=1e-10)
    later = sol.ratios[1:]
    worst = max(later) if later else 0.0
    passed = worst <= 0.32 and sol.residual < 1e-9 and abs(sup_mu - 0.3) < 1e-12
    return Check(6, "solver contraction ratio <= 0.32 and residual < 1e-9", passed,
                 {"sup_mu": sup_mu, "max_ratio_after_second": worst, "residual_l2": sol.residual,
                  "iterations": sol.iterations})


def flow_endpoints(R: float = 8.0, n: int = 128, tol: float = 1e-10) -> Check:
    grid = make_grid(0, R, n)
    H = segment_distance_structure(0.5, R)
    gamma = PathGamma.from_function(lambda s: s + 0.8j * s * (1 - s))
    times = np.linspace(0, 1, 11).tolist()
    flow = build_flow(H, gamma, times, grid, tol=tol)
    identity = sample_map(lambda z: z, grid, "id")
    psi0 = float(np.max(np.abs(flow.psi[0].values)))
    psi1 = (flow.psi[-1] - identity).sup()
    report = check_flow_conditions(flow, identity, eps=0.5, R_list=[0.5 * R, 0.75 * R], delta=0.15,
                                   tol=10 * tol)
    f2 = report.f2["sup_k"]
    f3 = report.f3["sup_ratio"]
    finite = bool(np.all(np.isfinite(f2)) and len(f3) > 0 and np.all(np.isfinite(f3)))
    passed = psi0 == 0.0 and psi1 <= 10 * tol and report.f1_ok and report.f4_ok and finite
    return Check(7, "flow endpoints psi_0 = 0, psi_1 = id; F1/F4 pass", passed,
                 {"sup_psi0": psi0, "sup_psi1_minus_id": psi1, "F1": report.f1_ok,
                  "F2": report.f2_ok, "F3": report.f3_ok, "F4": report.f4_ok,
                  "max_F2_sup_k": max(f2), "max_F3_ratio": max(f3) if f3 else float("nan"),
                  "max_residual": max(flow.residuals)})


def affine_theory(R: float = 8.0, n: int = 128) -> Check:
    grid = make_grid(0, R, n)
    measured, passed = {}, True
    for k in (0.1, 0.25, 0.5):
        H = ClosedFormBeltrami(lambda z, w, k=k: k * w, k, name=f"{k}w", z_independent=True)
        a = affine_fixed_point(H)
        err = abs(a - 1 / (1 + k))
        sol = affine_solution(H, a)
        res = residual(H, sample_exact(sol, grid))
        scale = float(np.max(np.abs(sample_exact(sol, grid).values)))
        measured[f"a_err@{k}"] = err
        measured[f"residual_sup@{k}"] = res.sup
        passed &= err <= 1e-12 and res.sup <= 1e-14 * scale / grid.h * 10
    return Check(8, "affine fixed point a = 1/(1+k) and zero residual", passed, measured)


def change_of_variables_check(t: float = 0.1, n_u: int = 100, pairs_per_u: int = 5,
                              seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    f = ExactMapId(MapKind.f_t, t=t)
    H = KirszbraunBeltrami(t)
    k0 = H.k_bound
    bound = composed_bound(k0)
    us = rng.uniform(-8, 8, n_u) + 1j * rng.uniform(-8, 8, n_u)
    worst0 = worst1 = worst_ratio = 0.0
    for u in us:
        z = complex(invert_exact(f, u))
        worst0 = max(worst0, abs(change_of_variables(H, f, u, 0.0, z=z)))
        worst1 = max(worst1, abs(change_of_variables(H, f, u, 1.0, z=z)))
        for _ in range(pairs_per_u):
            w1, w2 = (3 * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) for _ in range(2))
            q1 = change_of_variables(H, f, u, w1, z=z)
            q2 = change_of_variables(H, f, u, w2, z=z)
            worst_ratio = max(worst_ratio, abs(q1 - q2) / abs(w1 - w2))
    passed = worst0 <= 1e-10 and worst1 <= 1e-10 and worst_ratio <= bound + 0.01
    return Check(9, "change of variables: H~(u,0) = H~(u,1) = 0, ratio <= 2k/(1+k^2)", passed,
                 {"max_abs_Ht_0": worst0, "max_abs_Ht_1": worst1, "max_ratio": worst_ratio,
                  "bound": bound, "k0": k0})


def topology_checks(t: float = 0.1) -> Check:
    f = ExactMapId(MapKind.f_t, t=t)
    g = ExactMapId(MapKind.g_t, t=t)
    windings = {}
    for R in (1e2, 1e3):
        _, w, _ = winding_number(lambda z: eval_exact(f, z) - eval_exact(g, z), R)
        windings[R] = w
    total, _ = argument_increment(circle_trace(lambda z: z / 2 - z, 1.0, 256))
    lemma_err = abs(abs(total) - 2 * math.pi)
    theta = modulus_crossing(lambda u: eval_exact(g, invert_exact(f, u)), 50.0)
    passed = all(w == 2 for w in windings.values()) and lemma_err <= 1e-6 and theta is not None
    return Check(10, "winding 2, nested-circle increment 2pi, modulus crossing at R=50", passed,
                 {"winding@100": windings[1e2], "winding@1000": windings[1e3],
                  "lemma_increment_err": lemma_err, "crossing_theta": theta})


def brute_force_minimax(centers, weights, mesh: int = 2000, levels: int = 3,
                        min_size: float = 1e-10):
    """Grid search for ``min_b max_j |b - a_j| / r_j`` with certified zooming.

    The objective is ``L``-Lipschitz with ``L = max 1 / r_j``, so the minimizer
    lies within one cell diagonal of some grid point whose value is at most
    ``grid min + L * diagonal``.  Each refinement covers those points with a
    rectangle aligned to their principal axes and meshed with square cells
    (``mesh**2`` points in total), which keeps flat valleys (two active balls)
    resolvable.  Stops after ``levels`` grids or once the box is below
    ``min_size``.
    """
    a = np.asarray(centers, dtype=complex)
    r = np.asarray(weights, dtype=float)
    lip = float(np.max(1 / r))
    pad = 1e-6 + 0.05 * max(np.ptp(a.real), np.ptp(a.imag))
    origin = complex(a.real.min() - pad, a.imag.min() - pad)
    axis = 1.0 + 0j
    lu = np.ptp(a.real) + 2 * pad
    lv = np.ptp(a.imag) + 2 * pad
    best_b = origin
    for _ in range(levels):
        nu = int(np.clip(round(mesh * math.sqrt(lu / lv)), 16, mesh * mesh // 16))
        nv = max(16, mesh * mesh // nu)
        u, v = np.linspace(0, lu, nu), np.linspace(0, lv, nv)
        U, V = np.meshgrid(u, v, indexing="ij")
        # centers in the box frame; distances are invariant under the rotation
        loc = (a - origin) / axis
        obj = np.zeros(U.shape)
        for aj, rj in zip(loc, r):
            np.maximum(obj, np.hypot(U - aj.real, V - aj.imag) * (1 / rj), out=obj)
        i = np.unravel_index(np.argmin(obj), obj.shape)
        best_b = complex(origin + axis * complex(U[i], V[i]))
        diag = math.hypot(u[1] - u[0], v[1] - v[0])
        sel = obj <= obj[i] + lip * diag
        pts = origin + axis * (U[sel] + 1j * V[sel])
        if max(lu, lv) <= min_size or pts.size < 2:
            break
        rel = pts - pts.mean()
        cov = np.cov(np.stack([rel.real, rel.imag]))
        _, vecs = np.linalg.eigh(cov)
        axis = complex(vecs[0, 1], vecs[1, 1])
        pu, pv = (rel / axis).real, (rel / axis).imag
        origin = pts.mean() + axis * complex(pu.min() - diag, pv.min() - diag)
        lu = np.ptp(pu) + 2 * diag
        lv = np.ptp(pv) + 2 * diag
    return best_b, float(np.max(np.abs(best_b - a) / r))


def minimax_oracle(n_instances: int = 50, seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    worst_s = worst_b = 0.0
    better = True
    for _ in range(n_instances):
        m = int(rng.integers(3, 7))
        a = rng.normal(size=m) * 3 + 1j * rng.normal(size=m) * 3
        r = rng.uniform(0.5, 2.0, m)
        b, s = minimax_center(a, r)
        bb, sb = brute_force_minimax(a, r, mesh=1000, levels=10)
        worst_s = max(worst_s, abs(s - sb))
        worst_b = max(worst_b, abs(b - bb))
        better &= s <= sb + 1e-12
    passed = worst_s <= 1e-6 and worst_b <= 1e-6 and better
    return Check(11, "minimax center agrees with brute-force oracle", passed,
                 {"instances": n_instances, "max_value_gap": worst_s, "max_center_gap": worst_b,
                  "never_worse_than_oracle": better})


CHECKS = [threshold_identity, counterexample_witness, distortion_constants, growth_criterion,
          beurling_identity, solver_contraction, flow_endpoints, affine_theory,
          change_of_variables_check, topology_checks, minimax_oracle]


def run_check(fn) -> Check:
    start = time.perf_counter()
    check = fn()
    check.seconds = time.perf_counter() - start
    return check


def run_all(echo=None) -> list:
    out = []
    for fn in CHECKS:
        check = run_check(fn)
        if echo:
            echo(check.line())
        out.append(check)
    return out
