"""Winding numbers, modulus crossings, growth exponents and flow-condition checks."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .derivatives import distortion, wirtinger
from .errors import AliasingError, InvalidParameter, ZeroOnTrace
from .fields import SampledField


@dataclass(frozen=True)
class CircleTrace:
    R: float
    m: int
    values: np.ndarray

    def __post_init__(self):
        if self.m < 64:
            raise InvalidParameter(f"need at least 64 samples, got {self.m}")
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.m,) or not np.all(np.isfinite(v)):
            raise InvalidParameter("trace values must be m finite samples")
        object.__setattr__(self, "values", v)


def circle_points(R: float, m: int, center: complex = 0.0) -> np.ndarray:
    return center + R * np.exp(2j * np.pi * np.arange(m) / m)


def circle_trace(fn, R: float, m: int = 1024, center: complex = 0.0) -> CircleTrace:
    return CircleTrace(float(R), int(m), np.asarray(fn(circle_points(R, m, center)), dtype=complex))


def argument_increment(trace: CircleTrace, max_step: float = 0.5 * math.pi):
    """Total unwrapped change of ``arg`` around the closed trace, and the winding number.

    Raises ``AliasingError`` when a phase step exceeds ``max_step``; the
    principal value cannot tell such a step from its complement.
    """
    v = trace.values
    if np.any(v == 0):
        raise ZeroOnTrace(f"trace vanishes at {int(np.sum(v == 0))} samples")
    steps = np.angle(np.roll(v, -1) / v)
    worst = float(np.max(np.abs(steps)))
    if worst >= max_step:
        raise AliasingError(f"phase step {worst:.3f} exceeds {max_step:.3f}; resample denser", worst)
    total = float(np.sum(steps))
    winding = int(round(total / (2 * math.pi)))
    if abs(total / (2 * math.pi) - winding) >= 0.01:
        raise AliasingError("argument increment is not close to a multiple of 2 pi", worst)
    return total, winding


def winding_number(fn, R: float, m: int = 1024, retries: int = 3, center: complex = 0.0):
    """``argument_increment`` of ``fn`` on ``|z - center| = R`` with 4x resampling on aliasing."""
    for attempt in range(retries + 1):
        try:
            total, w = argument_increment(circle_trace(fn, R, m, center))
            return total, w, m
        except AliasingError:
            if attempt == retries:
                raise
            m *= 4


def modulus_crossing(fn, R: float, m: int = 1024, tol: float = 1e-10):
    """Some ``theta`` with ``|fn(R e^{i theta})| = R``, or ``None`` without a sign change."""

    def g(theta):
        return float(abs(complex(np.asarray(fn(np.array([R * np.exp(1j * theta)])))[0])) - R)

    theta = 2 * np.pi * np.arange(m + 1) / m
    vals = np.abs(np.asarray(fn(R * np.exp(1j * theta)), dtype=complex)) - R
    zero = np.flatnonzero(vals == 0)
    if zero.size:
        return float(theta[zero[0]])
    change = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
    if not change.size:
        return None
    lo, hi = theta[change[0]], theta[change[0] + 1]
    glo = vals[change[0]]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0:
            return float(mid)
        if np.sign(gm) == np.sign(glo):
            lo, glo = mid, gm
        else:
            hi = mid
    return float(0.5 * (lo + hi))


def modulus_ratio(fn, R: float, m: int = 1024, center: complex = 0.0) -> float:
    """``max |fn| / min |fn|`` on the circle of radius ``R``; a quasisymmetry gauge."""
    mod = np.abs(circle_trace(fn, R, m, center).values)
    lo = float(mod.min())
    if lo == 0:
        raise ZeroOnTrace(f"map vanishes on |z - {center}| = {R}")
    return float(mod.max()) / lo


@dataclass(frozen=True)
class GrowthFit:
    alpha: float
    intercept: float
    residual: float
    radii: list
    log_max: list

    @property
    def local_slopes(self) -> list:
        lr, lm = np.log(self.radii), np.asarray(self.log_max)
        return (np.diff(lm) / np.diff(lr)).tolist()


def growth_exponent(fn, radii, m: int = 1024) -> GrowthFit:
    """Least-squares slope of ``log max_{|z| = R} |fn|`` against ``log R``."""
    radii = np.asarray(radii, dtype=float)
    if radii.size < 4 or np.log10(radii.max() / radii.min()) < 2 or np.any(radii <= 1):
        raise InvalidParameter("need >= 4 radii > 1 spanning at least two decades")
    log_max = np.array([np.log(np.max(np.abs(fn(circle_points(R, m))))) for R in radii])
    lr = np.log(radii)
    A = np.vstack([lr, np.ones_like(lr)]).T
    coef, res, *_ = np.linalg.lstsq(A, log_max, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - log_max) ** 2)))
    return GrowthFit(float(coef[0]), float(coef[1]), resid, radii.tolist(), log_max.tolist())


def collision_probe(field: SampledField, rel_tol: float = 1e-12):
    """Smallest distance between images of distinct lattice points; zero means a collision."""
    from scipy.spatial import cKDTree

    v = field.values.ravel()
    pts = np.column_stack([v.real, v.imag])
    dist, _ = cKDTree(pts).query(pts, k=2)
    dmin = float(dist[:, 1].min())
    scale = float(np.abs(v).max()) or 1.0
    return dmin, dmin > rel_tol * scale


def degree_about(fn, z0: complex, radius: float, m: int = 1024) -> int:
    """Winding of ``fn(z) - fn(z0)`` on a small circle about ``z0``; 1 for local homeomorphisms."""
    f0 = complex(np.asarray(fn(np.array([complex(z0)])))[0])
    _, w, _ = winding_number(lambda z: fn(z) - f0, radius, m, center=z0)
    return w


@dataclass
class FlowCheckReport:
    f1_ok: bool
    f2_ok: bool
    f3_ok: bool
    f4_ok: bool
    f1: dict = field(default_factory=dict)
    f2: dict = field(default_factory=dict)
    f3: dict = field(default_factory=dict)
    f4: dict = field(default_factory=dict)

    @property
    def all_ok(self) -> bool:
        return self.f1_ok and self.f2_ok and self.f3_ok and self.f4_ok

    def to_dict(self) -> dict:
        return asdict(self)


def check_flow_conditions(flow, f: SampledField, eps: float, R_list, delta: float,
                          tol: float = 1e-8, f2_margin: float = 1e-6) -> FlowCheckReport:
    """Numeric surrogate of the four flow conditions.

    F1: ``psi_0 = 0`` and ``psi_1 = f`` in sup norm.  F2: sup distortion of
    ``f - psi_t`` below ``1 - f2_margin`` for each ``t < 1`` (interior
    points).  F3: for the first ``R`` in ``R_list`` that works, every adjacent
    pair ``t < s < 1`` with ``s - t < delta`` has
    ``max_{|z| >= R} |psi_t - psi_s| / |psi_t - f| < eps``; pairs reaching
    ``t = 1`` are skipped because ``psi_1 - f`` vanishes.  F4: ``|psi_t(0)|``.
    """
    times = list(flow.times)
    psi = {t: p for t, p in zip(times, flow.psi)}
    grid = f.grid
    if 0.0 not in psi or 1.0 not in psi:
        raise InvalidParameter("flow times must include 0 and 1")
    for p in flow.psi:
        if p.grid != grid:
            raise InvalidParameter("flow and f must share a grid")

    sup0 = psi[0.0].sup()
    sup1 = (psi[1.0] - f).sup()
    f1 = {"sup_psi0": sup0, "sup_psi1_minus_f": sup1, "tol": tol}
    f1_ok = sup0 <= tol and sup1 <= tol

    f2 = {"t": [], "sup_k": [], "collision_free": []}
    f2_ok = True
    for t in times:
        if t >= 1.0:
            continue
        diff = f - psi[t]
        dist = distortion(wirtinger(diff, "centered_fd"))
        _, distinct = collision_probe(diff)
        f2["t"].append(t)
        f2["sup_k"].append(dist.sup_k)
        f2["collision_free"].append(distinct)
        f2_ok &= bool(dist.sup_k < 1 - f2_margin) and distinct

    z = grid.lattice()
    f3 = {"eps": eps, "delta": delta, "R": None, "pairs": [], "sup_ratio": []}
    f3_ok = False
    attempts = []
    for R in R_list:
        mask = np.abs(z) >= R
        if not mask.any():
            continue
        ratios, pairs = [], []
        for t, s in zip(times[:-1], times[1:]):
            if s >= 1.0 or s - t >= delta:
                continue
            num = np.abs(psi[t].values - psi[s].values)[mask]
            den = np.abs(psi[t].values - f.values)[mask]
            with np.errstate(divide="ignore", invalid="ignore"):
                q = np.where(den > 0, num / den, np.where(num > 0, np.inf, 0.0))
            ratios.append(float(q.max()))
            pairs.append((t, s))
        worst = max(ratios) if ratios else 0.0
        attempts.append({"R": R, "sup_ratio": worst})
        if ratios and worst < eps:
            f3.update(R=R, pairs=pairs, sup_ratio=ratios)
            f3_ok = True
            break
        if f3["R"] is None:
            f3.update(pairs=pairs, sup_ratio=ratios)
    f3["attempts"] = attempts

    idx = grid.index_of(0.0)
    if idx is None:
        raise InvalidParameter("grid must contain the origin")
    at0 = [abs(complex(psi[t].values[idx])) for t in times]
    f4 = {"max_abs_psi_t_0": max(at0), "tol": tol}
    f4_ok = max(at0) <= tol
    return FlowCheckReport(f1_ok, f2_ok, f3_ok, f4_ok, f1, f2, f3, f4)
