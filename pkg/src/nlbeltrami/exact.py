"""Closed-form counterexample maps, their exact Wirtinger derivatives and inverses.

Every map except ``affine`` is a finite sum of terms ``c z^m |z|^p`` with a
separate term list inside and outside the unit disk (points with ``|z| = 1``
use the inner list).  For one term,

    d    (c z^m |z|^p) = c (m + p/2) z^(m-1) |z|^p
    dbar (c z^m |z|^p) = c (p/2)     z^(m+1) |z|^(p-2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidParameter, SingularPoint
from .fields import GridSpec, SampledField

SQRT2 = math.sqrt(2.0)
K_THRESHOLD = SQRT2
K_DIFF = 3.0 - 2.0 * SQRT2
K_H4_THRESHOLD = 1.0 / 3.0
_TINY = 1e-300


class MapKind(str, Enum):
    F_t = "F_t"
    G_t = "G_t"
    phi = "phi"
    phi_inverse = "phi_inverse"
    f_t = "f_t"
    g_t = "g_t"
    radial_stretch = "radial_stretch"
    affine = "affine"


T_FAMILIES = {MapKind.F_t, MapKind.G_t, MapKind.f_t, MapKind.g_t}


@dataclass(frozen=True)
class ExactMapId:
    kind: MapKind
    t: float = 0.0
    K: float = 2.0
    a: complex = 1.0
    b: complex = 0.0
    c: complex = 0.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", MapKind(self.kind))
        except ValueError:
            raise InvalidParameter(f"unknown map {self.kind!r}") from None
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.kind in T_FAMILIES and not (0.0 <= self.t < 1.0):
            raise InvalidParameter(f"t must lie in [0, 1), got {self.t}")
        if self.kind is MapKind.radial_stretch and not self.K > 1.0:
            raise InvalidParameter(f"radial stretch needs K > 1, got {self.K}")
        if self.kind is MapKind.affine and not abs(self.b) < abs(self.a):
            raise InvalidParameter("affine map needs |b| < |a|")

    @property
    def label(self) -> str:
        if self.kind in T_FAMILIES:
            return f"{self.kind.value}(t={self.t:g})"
        if self.kind is MapKind.radial_stretch:
            return f"radial_stretch(K={self.K:g})"
        if self.kind is MapKind.affine:
            return f"affine(a={self.a},b={self.b},c={self.c})"
        return self.kind.value

    def __call__(self, z):
        return eval_exact(self, z)


def parse_map(name: str, **params) -> ExactMapId:
    """``parse_map("f_t", t=0.1)``; unknown parameters are ignored."""
    keys = {"t", "K", "a", "b", "c"}
    return ExactMapId(name, **{k: v for k, v in params.items() if k in keys and v is not None})


def _terms(m: ExactMapId):
    t = m.t
    a = SQRT2 - 1.0
    ident = [(1.0, 1, 0.0)]
    if m.kind is MapKind.F_t:
        return [(1 + t, 1, 0.0), (-t, 2, 0.0)], [(1 + t, 1, 1.0), (-t, 2, 0.0)]
    if m.kind is MapKind.G_t:
        return ident, [(1 + t, 1, 1.0), (-t, 1, 0.0)]
    if m.kind is MapKind.phi:
        return ident, [(1.0, 1, a)]
    if m.kind is MapKind.phi_inverse:
        return ident, [(1.0, 1, 1.0 / SQRT2 - 1.0)]
    if m.kind is MapKind.f_t:
        # (z |z|^(1/sqrt2 - 1))^2 = z^2 |z|^(sqrt2 - 2)
        return [(1 + t, 1, 0.0), (-t, 2, 0.0)], [(1 + t, 1, a), (-t, 2, SQRT2 - 2.0)]
    if m.kind is MapKind.g_t:
        return ident, [(1 + t, 1, a), (-t, 1, 1.0 / SQRT2 - 1.0)]
    if m.kind is MapKind.radial_stretch:
        terms = [(1.0, 1, m.K - 1.0)]
        return terms, terms
    return None


def _abs_power(r, p):
    if p == 0.0:
        return np.ones_like(r)
    return np.exp(p * np.log(np.maximum(r, _TINY)))


def _branches(z):
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    return z, r, r > 1.0


def eval_exact(m: ExactMapId, z):
    """Value of the map at ``z`` (scalar or array)."""
    scalar = np.ndim(z) == 0
    z, r, outer = _branches(z)
    if m.kind is MapKind.affine:
        out = m.a * z + m.b * np.conj(z) + m.c
    else:
        inner_terms, outer_terms = _terms(m)
        out = np.zeros_like(z)
        for mask, terms in ((~outer, inner_terms), (outer, outer_terms)):
            if not mask.any():
                continue
            zz, rr = z[mask], r[mask]
            acc = np.zeros_like(zz)
            for c, k, p in terms:
                acc = acc + c * zz**k * _abs_power(rr, p)
            out[mask] = acc
    return complex(out) if scalar else out


def wirtinger_exact(m: ExactMapId, z):
    """Exact ``(d f, dbar f)`` of the branch selected at ``z``."""
    scalar = np.ndim(z) == 0
    z, r, outer = _branches(z)
    if m.kind is MapKind.affine:
        d = np.full_like(z, m.a)
        dbar = np.full_like(z, m.b)
    else:
        inner_terms, outer_terms = _terms(m)
        d = np.zeros_like(z)
        dbar = np.zeros_like(z)
        for mask, terms in ((~outer, inner_terms), (outer, outer_terms)):
            if not mask.any():
                continue
            zz, rr = z[mask], r[mask]
            if any(p != 0.0 for _, _, p in terms) and np.any(rr == 0):
                raise SingularPoint(f"{m.label} has a fractional power at z = 0")
            dd = np.zeros_like(zz)
            db = np.zeros_like(zz)
            for c, k, p in terms:
                rp = _abs_power(rr, p)
                dd = dd + c * (k + p / 2) * zz ** (k - 1) * rp
                if p != 0.0:
                    db = db + c * (p / 2) * zz ** (k + 1) * rp / rr**2
            d[mask] = dd
            dbar[mask] = db
    if scalar:
        return complex(d), complex(dbar)
    return d, dbar


def exact_pair(m: ExactMapId, grid: GridSpec):
    """Exact Wirtinger derivatives sampled on the lattice as a ``WirtingerPair``."""
    from .derivatives import WirtingerPair

    d, dbar = wirtinger_exact(m, grid.lattice())
    return WirtingerPair(
        SampledField(grid, d, f"d[{m.label}]"),
        SampledField(grid, dbar, f"dbar[{m.label}]"),
        "exact",
    )


def sample_exact(m: ExactMapId, grid: GridSpec) -> SampledField:
    return SampledField(grid, eval_exact(m, grid.lattice()), m.label)


# --- inverses -------------------------------------------------------------

def _radial_profile(terms, r):
    # maps in this family send z = r e^{i theta} to e^{i theta} rho(r)
    out = np.zeros_like(r)
    for c, _, p in terms:
        out = out + c * r * _abs_power(r, p)
    return out


def _invert_profile(terms, target, lo, hi, iters=200):
    lo = np.full_like(target, lo)
    hi = np.asarray(hi, dtype=float) * np.ones_like(target)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = _radial_profile(terms, mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 4 * np.finfo(float).eps * np.maximum(hi, 1.0)):
            break
    return 0.5 * (lo + hi)


def _is_radial(m: ExactMapId) -> bool:
    terms = _terms(m)
    return terms is not None and all(k == 1 for branch in terms for _, k, _ in branch)


def _invert_F_t(t, u):
    u = np.asarray(u, dtype=complex)
    z = np.array(u, copy=True)
    if t == 0.0:
        inner_ok = np.abs(u) <= 1.0
    else:
        root = np.sqrt((1 + t) ** 2 - 4 * t * u)
        z1 = ((1 + t) - root) / (2 * t)
        z2 = (1 + t) / t - z1
        z = np.where(np.abs(z1) <= np.abs(z2), z1, z2)
        inner_ok = np.abs(z) <= 1.0 + 1e-12
    out = ~inner_ok
    if out.any():
        uo = u[out]
        w = uo / np.sqrt(np.abs(uo))
        for _ in range(100):
            r = np.abs(w)
            val = (1 + t) * w * r - t * w**2
            res = val - uo
            d = 1.5 * (1 + t) * r - 2 * t * w
            db = 0.5 * (1 + t) * w**2 / r
            jac = np.abs(d) ** 2 - np.abs(db) ** 2
            e = -res
            step = (np.conj(d) * e - db * np.conj(e)) / jac
            # keep iterates away from the origin, where the outer formula is singular
            lim = 0.5 * np.abs(w)
            big = np.abs(step) > lim
            step = np.where(big, step * lim / np.where(big, np.abs(step), 1.0), step)
            w = w + step
            if np.all(np.abs(step) <= 1e-15 * np.abs(w)):
                break
        z[out] = w
    return z


def invert_exact(m: ExactMapId, u):
    """Preimage ``z`` with ``m(z) = u``."""
    scalar = np.ndim(u) == 0
    u = np.asarray(u, dtype=complex)
    if m.kind is MapKind.affine:
        v = u - m.c
        z = (np.conj(m.a) * v - m.b * np.conj(v)) / (abs(m.a) ** 2 - abs(m.b) ** 2)
    elif m.kind is MapKind.F_t:
        z = _invert_F_t(m.t, u)
    elif m.kind is MapKind.f_t:
        z = eval_exact(ExactMapId(MapKind.phi), _invert_F_t(m.t, u))
    elif _is_radial(m):
        inner_terms, outer_terms = _terms(m)
        rho = np.abs(u)
        r = np.zeros_like(rho)
        # normalized maps have rho(1) = 1 on both branches
        one = float(_radial_profile(inner_terms, np.array([1.0]))[0])
        ins = rho <= one
        if ins.any():
            r[ins] = _invert_profile(inner_terms, rho[ins], 0.0, 1.0)
        if (~ins).any():
            target = rho[~ins]
            hi = np.maximum(2.0, target)
            while np.any(_radial_profile(outer_terms, hi) < target):
                hi = np.where(_radial_profile(outer_terms, hi) < target, 2 * hi, hi)
            r[~ins] = _invert_profile(outer_terms, target, 1.0, hi)
        phase = np.where(rho > 0, u / np.where(rho > 0, rho, 1.0), 1.0)
        z = r * phase
    else:
        raise InvalidParameter(f"no inverse available for {m.label}")
    return complex(z) if scalar else z


# --- constants ------------------------------------------------------------

@dataclass(frozen=True)
class TheoreticalConstants:
    t: float
    k_f: float
    k_g: float
    k_diff: float = K_DIFF
    k_threshold: float = K_DIFF
    K_threshold: float = K_THRESHOLD
    k_h4_threshold: float = K_H4_THRESHOLD

    @property
    def k0(self) -> float:
        return max(self.k_f, self.k_g, self.k_diff)


def k_f(t: float) -> float:
    return (SQRT2 - 1 + t) / (SQRT2 + 1 - t)


def k_g(t: float) -> float:
    return (2 - SQRT2 + t) / (2 + SQRT2 + t)


def theoretical_distortions(t: float) -> TheoreticalConstants:
    if not 0.0 <= t < 1.0:
        raise InvalidParameter(f"t must lie in [0, 1), got {t}")
    return TheoreticalConstants(t, k_f(t), k_g(t))


def composed_bound(k: float) -> float:
    """Ellipticity ``2k / (1 + k^2)`` after a change of variables by a k-map."""
    return 2.0 * k / (1.0 + k * k)


def distortion_K(k):
    return (1 + k) / (1 - k)
