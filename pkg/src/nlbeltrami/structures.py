"""Representations of the nonlinear field ``H(z, w)`` with their ellipticity data."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import InvalidParameter
from .fields import SampledField
from .kirszbraun import KirszbraunColumn, WGrid, counterexample_anchors, counterexample_k0
from .transforms import cutoff


class BeltramiStructure:
    """Vectorized ``H(z, w)``; subclasses implement ``__call__``.

    ``k_bound`` is the Lipschitz constant in ``w``; ``satisfies_h3`` and
    ``satisfies_h4`` declare ``H(z, 0) = 0`` and ``H(z, 1) = 0``.
    """

    variant = "abstract"
    k_bound: float = 0.0
    satisfies_h3: bool = True
    satisfies_h4: bool = False
    z_independent: bool = False
    name: str = "H"

    def __call__(self, z, w):
        raise NotImplementedError

    def scalar(self, z: complex, w: complex) -> complex:
        return complex(np.asarray(self(np.array([complex(z)]), np.array([complex(w)])))[0])

    def audit(self, z, n_pairs: int = 2000, radius: float = 4.0, seed: int = 0):
        """Sampled Lipschitz ratio in ``w`` at each point of ``z``; returns the maximum."""
        rng = np.random.default_rng(seed)
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        zz = np.repeat(z, n_pairs)
        w1 = radius * (rng.uniform(-1, 1, zz.size) + 1j * rng.uniform(-1, 1, zz.size))
        w2 = radius * (rng.uniform(-1, 1, zz.size) + 1j * rng.uniform(-1, 1, zz.size))
        q = np.abs(self(zz, w1) - self(zz, w2)) / np.abs(w1 - w2)
        return float(q.max())

    def describe(self) -> dict:
        return {"variant": self.variant, "name": self.name, "k_bound": self.k_bound,
                "H3": self.satisfies_h3, "H4": self.satisfies_h4}


class ClosedFormBeltrami(BeltramiStructure):
    variant = "closed_form"

    def __init__(self, func: Callable, k_bound: float, satisfies_h3: bool = True,
                 satisfies_h4: bool = False, name: str = "H", z_independent: bool = False):
        if not 0 <= k_bound < 1:
            raise InvalidParameter(f"k_bound must lie in [0, 1), got {k_bound}")
        self.func = func
        self.k_bound = float(k_bound)
        self.satisfies_h3 = satisfies_h3
        self.satisfies_h4 = satisfies_h4
        self.name = name
        self.z_independent = z_independent

    def __call__(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        return np.broadcast_to(np.asarray(self.func(z, w), dtype=complex),
                               np.broadcast(z, w).shape)


class LinearBeltrami(BeltramiStructure):
    """``H(z, w) = mu(z) w + nu(z) conj(w)``.

    ``mu`` and ``nu`` are constants, ``SampledField``s (valid only when ``z``
    is their own lattice) or callables of ``z``; callables need an explicit
    ``k_bound``.
    """

    variant = "linear"

    def __init__(self, mu, nu=0.0, k_bound: float | None = None, name: str = "linear"):
        self.mu, self.nu = mu, nu
        self.name = name
        sampled = [c for c in (mu, nu) if not callable(c)]
        if k_bound is None:
            if len(sampled) < 2:
                raise InvalidParameter("callable coefficients need an explicit k_bound")
            k_bound = float(np.max(np.abs(self._values(mu)) + np.abs(self._values(nu))))
        if not 0 <= k_bound < 1:
            raise InvalidParameter(f"ellipticity bound must lie in [0, 1), got {k_bound}")
        self.k_bound = float(k_bound)
        self.satisfies_h3 = True
        self.satisfies_h4 = len(sampled) == 2 and bool(
            np.all(np.asarray(self._values(mu)) + np.asarray(self._values(nu)) == 0))
        self.z_independent = all(np.ndim(self._values(c)) == 0 for c in sampled) and len(sampled) == 2

    @staticmethod
    def _values(c):
        return c.values if isinstance(c, SampledField) else c

    @staticmethod
    def _coef(c, z):
        if isinstance(c, SampledField):
            if z.shape != c.values.shape:
                raise InvalidParameter("sampled coefficient needs z on its own lattice")
            return c.values
        if callable(c):
            return c(z)
        return c

    def __call__(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        return self._coef(self.mu, z) * w + self._coef(self.nu, z) * np.conj(w)


class KirszbraunBeltrami(BeltramiStructure):
    """Counterexample field tabulated per base point by Kirszbraun extension.

    ``H(z, .)`` takes the prescribed values at ``0``, ``d f_t(z)`` and
    ``d g_t(z)``; any other ``w`` is extended on demand from the growing
    table at ``z`` (seeded with the w-grid when one is given).
    """

    variant = "tabulated"

    def __init__(self, t: float, k0: float | None = None, w_grid: WGrid | None = None):
        self.t = float(t)
        self.k_bound = counterexample_k0(t) if k0 is None else float(k0)
        self.w_grid = w_grid
        self.satisfies_h3 = True
        self.satisfies_h4 = False
        self.name = f"kirszbraun(t={t:g})"
        self._columns: dict[complex, KirszbraunColumn] = {}

    def column(self, z: complex) -> KirszbraunColumn:
        z = complex(z)
        col = self._columns.get(z)
        if col is None:
            col = KirszbraunColumn(counterexample_anchors(z, self.t), self.k_bound)
            if self.w_grid is not None:
                prefixed = set(col.points.tolist())
                col.extend_all(w for w in self.w_grid.points() if w not in prefixed)
            self._columns[z] = col
        return col

    def __call__(self, z, w):
        from .exact import ExactMapId, MapKind, wirtinger_exact

        z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
        out = np.empty(z.shape, dtype=complex)
        fd, fdb = wirtinger_exact(ExactMapId(MapKind.f_t, t=self.t), z)
        gd, gdb = wirtinger_exact(ExactMapId(MapKind.g_t, t=self.t), z)
        done = np.zeros(z.shape, dtype=bool)
        for anchor, value in ((0.0, 0.0), (gd, gdb), (fd, fdb)):
            hit = ~done & (w == anchor)
            out[hit] = np.broadcast_to(value, z.shape)[hit]
            done |= hit
        for idx in zip(*np.nonzero(~done)):
            out[idx] = self.column(z[idx]).value(w[idx])
        return out


def zero_structure() -> LinearBeltrami:
    return LinearBeltrami(0.0, name="zero")


def windowed_linear(k: float, R: float, inner: float = 0.8, outer: float = 0.95) -> LinearBeltrami:
    """``H(z, w) = k chi(z) w`` with the smooth radial window ``chi``."""

    def mu(z):
        return k * cutoff(z, R, inner, outer)

    return LinearBeltrami(mu, k_bound=k, name=f"{k:g}*cutoff*w")


def segment_distance_structure(k: float, R: float, inner: float = 0.5, outer: float = 0.9):
    """Nonlinear field ``k chi(z) dist(w, [0, 1])``; vanishes at ``w = 0`` and ``w = 1``."""

    def H(z, w):
        x = np.clip(w.real, 0.0, 1.0)
        return k * cutoff(z, R, inner, outer) * np.abs(w - x)

    return ClosedFormBeltrami(H, k, True, True, name=f"{k:g}*cutoff*dist(w,[0,1])")


def imaginary_part_structure(k: float, R: float, inner: float = 0.5, outer: float = 0.9):
    """R-linear field ``k chi(z) Im(w)``, zero on the real axis."""

    def H(z, w):
        return k * cutoff(z, R, inner, outer) * w.imag

    return ClosedFormBeltrami(H, k, True, True, name=f"{k:g}*cutoff*Im(w)")
