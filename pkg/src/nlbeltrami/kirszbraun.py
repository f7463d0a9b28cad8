"""Pointwise Kirszbraun extension of Lipschitz constraints via weighted minimax centers.

Given anchors ``w_j -> a_j`` that are ``k0``-Lipschitz, the value at a new
point ``w`` is the unique minimizer ``b`` of ``max_j |b - a_j| / r_j`` with
``r_j = k0 |w_j - w|``.  The minimum ``s0`` never exceeds 1, so the
extended table stays ``k0``-Lipschitz.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AnchorViolation, InvalidParameter
from .exact import ExactMapId, MapKind, theoretical_distortions, wirtinger_exact

_REL = 1e-12


# --- minimax center ---------------------------------------------------------

def _pair(a1, r1, a2, r2):
    s = abs(a2 - a1) / (r1 + r2)
    b = (r2 * a1 + r1 * a2) / (r1 + r2)
    return b, s


def _objective(b, a, r):
    return max(abs(b - aj) / rj for aj, rj in zip(a, r))


def _disks_meet(a, r, s):
    """Whether the closed disks ``D(a_j, s r_j)`` have a common point; returns it or None."""
    rad = [s * rj for rj in r]
    cands = list(a)
    for i, j in itertools.combinations(range(len(a)), 2):
        d = abs(a[j] - a[i])
        if d == 0 or d > rad[i] + rad[j] or d < abs(rad[i] - rad[j]):
            continue
        x = (d * d + rad[i] ** 2 - rad[j] ** 2) / (2 * d)
        y = math.sqrt(max(rad[i] ** 2 - x * x, 0.0))
        e = (a[j] - a[i]) / d
        base = a[i] + x * e
        cands += [base + 1j * y * e, base - 1j * y * e]
    best, best_val = None, math.inf
    for c in cands:
        val = max(abs(c - aj) - radj for aj, radj in zip(a, rad))
        if val < best_val:
            best, best_val = c, val
    scale = max(max(rad), 1e-300)
    return best if best_val <= 1e-12 * scale else None


def _triple_bisect(a, r, lo):
    hi = _objective(a[0], a, r)
    point = a[0]
    for _ in range(200):
        if hi - lo <= 1e-15 * max(hi, 1e-300):
            break
        mid = 0.5 * (lo + hi)
        p = _disks_meet(a, r, mid)
        if p is None:
            lo = mid
        else:
            hi, point = mid, p
    return point, hi


def _triple_all_active(a, r):
    """Point equidistant, in the weighted sense, from three centers; None if degenerate."""
    a1 = a[0]
    q2, q3 = a[1] - a1, a[2] - a1
    r1, r2, r3 = r
    # centers translated to a1: |b - a1 - q_j|^2 = sigma r_j^2; subtracting the first
    # equation leaves the linear system M (b - a1) = c + sigma d
    M = np.array([[2 * q2.real, 2 * q2.imag],
                  [2 * q3.real, 2 * q3.imag]])
    scale = max(abs(q2), abs(q3)) ** 2
    det = np.linalg.det(M)
    if abs(det) <= 1e-12 * scale:
        return None
    c = np.array([abs(q2) ** 2, abs(q3) ** 2])
    d = np.array([r1 * r1 - r2 * r2, r1 * r1 - r3 * r3])
    b0 = np.linalg.solve(M, c)
    b1 = np.linalg.solve(M, d)
    p0 = complex(b0[0], b0[1])
    p1 = complex(b1[0], b1[1])
    A = abs(p1) ** 2
    B = 2 * (p0.conjugate() * p1).real - r1 * r1
    C = abs(p0) ** 2
    if A <= 1e-14 * max(abs(B), 1e-300):
        roots = [-C / B] if B != 0 else []
    else:
        disc = B * B - 4 * A * C
        if disc < 0:
            if disc < -1e-10 * B * B:
                return None
            disc = 0.0
        q = -0.5 * (B + math.copysign(math.sqrt(disc), B))
        roots = [q / A] + ([C / q] if q != 0 else [])
    roots = sorted(x for x in roots if x >= -1e-14 * max(C, 1e-300) / max(r1 * r1, 1e-300))
    if not roots:
        return None
    sigma = max(roots[0], 0.0)
    b = a1 + p0 + sigma * p1
    s = math.sqrt(sigma)
    dev = max(abs(abs(b - aj) - s * rj) for aj, rj in zip(a, r))
    if dev > 1e-9 * max(s * max(r), abs(p0), 1e-300):
        return None
    return b, s


def _triple(a, r):
    best = None
    for i, j in ((0, 1), (0, 2), (1, 2)):
        b, s = _pair(a[i], r[i], a[j], r[j])
        if best is None or s > best[1]:
            best = (b, s, (i, j))
    b, s, (i, j) = best
    k = 3 - i - j
    if abs(b - a[k]) / r[k] <= s * (1 + _REL) + 1e-300:
        return b, s, (i, j)
    sol = _triple_all_active(a, r)
    if sol is None:
        b, s = _triple_bisect(a, r, s)
    else:
        b, s = sol
    return b, s, (0, 1, 2)


def _solve_small(a, r):
    """Exact optimum for at most four constraints: the worst sub-problem of size <= 3."""
    m = len(a)
    if m == 1:
        return a[0], 0.0, (0,)
    best = None
    for size in (2, 3):
        for T in itertools.combinations(range(m), size):
            if size == 2:
                b, s = _pair(a[T[0]], r[T[0]], a[T[1]], r[T[1]])
                sup = T
            else:
                b, s, local = _triple([a[i] for i in T], [r[i] for i in T])
                sup = tuple(T[i] for i in local)
            if best is None or s > best[1] * (1 + _REL):
                best = (b, s, sup)
    return best


def _minimax(a: np.ndarray, r: np.ndarray):
    if len(a) == 1:
        return complex(a[0]), 0.0
    support = [0]
    b, s = complex(a[0]), 0.0
    for _ in range(10 * len(a) + 100):
        vals = np.abs(a - b) / r
        j = int(np.argmax(vals))
        if vals[j] <= s * (1 + _REL) + 1e-300:
            break
        if j in support:
            # a support member reported as violated is rounding noise: the
            # support optimum is already the answer to working precision
            break
        idx = support + [j]
        b_new, s_new, sup = _solve_small([complex(a[i]) for i in idx], [float(r[i]) for i in idx])
        if s_new <= s:
            break
        b, s = complex(b_new), float(s_new)
        support = [idx[i] for i in sup]
    return b, float(np.max(np.abs(a - b) / r))


def minimax_center(centers, weights):
    """Minimize ``max_j |b - a_j| / r_j`` over ``b``; returns ``(b, s0)``.

    Active-set iteration: the optimum of the current support plus the most
    violated constraint is solved exactly (one, two or three active balls),
    and the objective strictly increases until no constraint is violated.
    """
    a = np.atleast_1d(np.asarray(centers, dtype=complex))
    r = np.atleast_1d(np.asarray(weights, dtype=float))
    if a.size == 0 or a.shape != r.shape:
        raise InvalidParameter("centers and weights must be non-empty and of equal length")
    if not np.all(r > 0) or not np.all(np.isfinite(r)):
        raise InvalidParameter("weights must be positive and finite")
    return _minimax(a, r)


# --- anchors and extension --------------------------------------------------

def _max_ratio(w, a):
    best, pair = 0.0, None
    for i in range(len(w) - 1):
        dw = np.abs(w[i + 1:] - w[i])
        da = np.abs(a[i + 1:] - a[i])
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(dw > 0, da / dw, np.where(da > 0, np.inf, 0.0))
        j = int(np.argmax(q))
        if q[j] > best:
            best, pair = float(q[j]), (i, i + 1 + j)
    return best, pair


@dataclass(frozen=True)
class AnchorSet:
    base_point: complex
    anchors: tuple
    k0: float

    def __post_init__(self):
        anchors = tuple((complex(w), complex(v)) for w, v in self.anchors)
        object.__setattr__(self, "anchors", anchors)
        object.__setattr__(self, "base_point", complex(self.base_point))
        if not anchors:
            raise InvalidParameter("need at least one anchor")
        if not 0 < self.k0 < 1:
            raise InvalidParameter(f"k0 must lie in (0, 1), got {self.k0}")
        w = np.array([p[0] for p in anchors])
        if len(set(w.tolist())) != len(w):
            raise InvalidParameter("anchor points must be pairwise distinct")
        ratio, pair = _max_ratio(w, np.array([p[1] for p in anchors]))
        if ratio > self.k0 * (1 + _REL):
            raise AnchorViolation(
                f"anchors are {ratio:.15g}-Lipschitz, above k0 = {self.k0:.15g}", ratio, pair)

    @property
    def points(self) -> np.ndarray:
        return np.array([p[0] for p in self.anchors])

    @property
    def values(self) -> np.ndarray:
        return np.array([p[1] for p in self.anchors])


def _extend(w, a, k0, w_new):
    dist = np.abs(w - w_new)
    hit = np.flatnonzero(dist == 0)
    if hit.size:
        return complex(a[hit[0]]), 0.0
    return _minimax(a, k0 * dist)


def extend_at(anchors: AnchorSet, return_s0: bool = False):
    b, s0 = _extend(anchors.points, anchors.values, anchors.k0, anchors.base_point)
    return (b, s0) if return_s0 else b


class KirszbraunColumn:
    """Growing ``k0``-Lipschitz table ``w -> H(w)`` at one base point ``z``.

    Every query at a new ``w`` is extended from all previously stored points
    and then stored, so the table remains ``k0``-Lipschitz whatever order the
    queries arrive in.  Identical query sequences give identical tables.

    Queries closer than ``resolution * max(1, |w|)`` to a stored point return
    that point's value instead of being stored: at such gaps float noise in
    the stored values dominates the Lipschitz constraint.
    """

    def __init__(self, anchors, k0: float, check: bool = True, resolution: float = 1e-9):
        self.k0 = float(k0)
        self.resolution = float(resolution)
        self._w = np.empty(max(16, 2 * len(anchors)), dtype=complex)
        self._a = np.empty_like(self._w)
        self._n = 0
        self._index = {}
        self.max_s0 = 0.0
        for w, v in anchors:
            w, v = complex(w), complex(v)
            if w in self._index:
                if v != self._a[self._index[w]]:
                    raise AnchorViolation(f"conflicting values at w = {w}")
                continue
            self._append(w, v)
        if check and self._n > 1:
            ratio, pair = _max_ratio(self.points, self.values)
            if ratio > self.k0 * (1 + _REL):
                raise AnchorViolation(
                    f"anchors are {ratio:.15g}-Lipschitz, above k0 = {self.k0:.15g}", ratio, pair)
        self.n_anchors = self._n

    def _append(self, w, v):
        if self._n == len(self._w):
            self._w = np.concatenate([self._w, np.empty_like(self._w)])
            self._a = np.concatenate([self._a, np.empty_like(self._a)])
        self._w[self._n] = w
        self._a[self._n] = v
        self._index[w] = self._n
        self._n += 1

    @property
    def points(self) -> np.ndarray:
        return self._w[: self._n].copy()

    @property
    def values(self) -> np.ndarray:
        return self._a[: self._n].copy()

    def __len__(self):
        return self._n

    def value(self, w: complex) -> complex:
        w = complex(w)
        i = self._index.get(w)
        if i is not None:
            return complex(self._a[i])
        if self.resolution > 0:
            gap = np.abs(self._w[: self._n] - w)
            j = int(np.argmin(gap))
            if gap[j] <= self.resolution * max(1.0, abs(w)):
                return complex(self._a[j])
        b, s0 = _extend(self._w[: self._n], self._a[: self._n], self.k0, w)
        self.max_s0 = max(self.max_s0, s0)
        self._append(w, b)
        return b

    def extend_all(self, ws):
        for w in ws:
            self.value(w)
        return self


@dataclass(frozen=True)
class WGrid:
    """Square ``m x m`` grid of w-points of half width ``radius``, enumerated row by row."""

    radius: float
    m: int = 41
    center: complex = 0.0

    def __post_init__(self):
        if not self.radius > 0 or self.m < 2:
            raise InvalidParameter("w-grid needs radius > 0 and m >= 2")

    def points(self) -> np.ndarray:
        s = np.linspace(-self.radius, self.radius, self.m)
        # row-major: the imaginary part is constant along a row
        return np.array([complex(self.center) + x + 1j * y for y in s for x in s])

    def to_header(self) -> dict:
        return {"radius": self.radius, "m": self.m,
                "center_re": complex(self.center).real, "center_im": complex(self.center).imag}


@dataclass(frozen=True)
class TabulatedField:
    z: complex
    t: float
    enumeration: np.ndarray
    values: np.ndarray
    k0: float
    w_grid: WGrid | None = None
    max_s0: float = 0.0
    n_anchors: int = 3
    meta: dict = field(default_factory=dict, compare=False)


def counterexample_k0(t: float, slack: float = 1e-12) -> float:
    return theoretical_distortions(t).k0 + slack


def counterexample_anchors(z: complex, t: float):
    """The three prescribed constraints ``0 -> 0``, ``d f -> dbar f``, ``d g -> dbar g``."""
    fd, fdb = wirtinger_exact(ExactMapId(MapKind.f_t, t=t), complex(z))
    gd, gdb = wirtinger_exact(ExactMapId(MapKind.g_t, t=t), complex(z))
    anchors = [(0j, 0j), (fd, fdb)]
    if gd != fd:
        anchors.append((gd, gdb))
    return anchors


def default_w_radius(anchors, factor: float = 1.5) -> float:
    return factor * max(1.0, max(abs(w) for w, _ in anchors))


def build_field(z: complex, t: float, k0: float | None = None, w_grid: WGrid | None = None,
                m: int = 41) -> TabulatedField:
    """Sequential extension of the prescribed constraints over a w-grid."""
    if k0 is None:
        k0 = counterexample_k0(t)
    anchors = counterexample_anchors(z, t)
    if w_grid is None:
        w_grid = WGrid(default_w_radius(anchors), m)
    column = KirszbraunColumn(anchors, k0)
    prefixed = set(column.points.tolist())
    column.extend_all(w for w in w_grid.points() if w not in prefixed)
    return TabulatedField(complex(z), float(t), column.points, column.values, float(k0),
                          w_grid, column.max_s0, column.n_anchors)


def lipschitz_audit(field, pairs="exhaustive", n_pairs: int = 200_000, seed: int = 0,
                    exhaustive_limit: int = 5000):
    """Largest ``|H(w_i) - H(w_j)| / |w_i - w_j|`` over audited pairs and the maximizing pair.

    Accepts a ``TabulatedField``/``KirszbraunColumn`` or a ``(points, values)`` tuple.
    Exhaustive when the table is small enough, otherwise ``n_pairs`` seeded random pairs.
    """
    if isinstance(field, tuple):
        w, a = (np.asarray(x, dtype=complex) for x in field)
    elif isinstance(field, KirszbraunColumn):
        w, a = field.points, field.values
    else:
        w, a = np.asarray(field.enumeration), np.asarray(field.values)
    if len(w) < 2:
        raise InvalidParameter("need at least two tabulated points")
    if pairs == "exhaustive" and len(w) <= exhaustive_limit:
        ratio, pair = _max_ratio(w, a)
        return ratio, pair
    rng = np.random.default_rng(seed)
    i = rng.integers(0, len(w), n_pairs)
    j = rng.integers(0, len(w), n_pairs)
    keep = w[i] != w[j]
    i, j = i[keep], j[keep]
    q = np.abs(a[i] - a[j]) / np.abs(w[i] - w[j])
    best = int(np.argmax(q))
    return float(q[best]), (int(i[best]), int(j[best]))
