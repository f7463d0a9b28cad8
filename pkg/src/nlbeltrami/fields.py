"""Square lattices in the plane and complex fields sampled on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidParameter, NonFiniteValue


@dataclass(frozen=True)
class GridSpec:
    """Periodic square lattice ``center + (-R + j h) + i(-R + k h)``, ``0 <= j, k < n``.

    Arrays sampled on the grid use ``values[j, k]``: the first axis runs
    along the real direction, the second along the imaginary direction.
    """

    center: complex
    R: float
    n: int

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "R", float(self.R))
        if not np.isfinite(self.R) or self.R <= 0:
            raise InvalidParameter(f"half width R must be positive, got {self.R}")
        if int(self.n) != self.n or self.n < 4 or self.n % 2:
            raise InvalidParameter(f"n must be an even integer >= 4, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return 2.0 * self.R / self.n

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def x(self) -> np.ndarray:
        return self.center.real - self.R + self.h * np.arange(self.n)

    @property
    def y(self) -> np.ndarray:
        return self.center.imag - self.R + self.h * np.arange(self.n)

    @property
    def min_corner(self) -> complex:
        return complex(self.x[0], self.y[0])

    def lattice(self) -> np.ndarray:
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        return X + 1j * Y

    def index_of(self, z: complex):
        """Lattice index ``(j, k)`` of ``z`` or ``None`` when ``z`` is off-lattice."""
        z = complex(z)
        fj = (z.real - self.center.real + self.R) / self.h
        fk = (z.imag - self.center.imag + self.R) / self.h
        j, k = int(round(fj)), int(round(fk))
        if abs(fj - j) > 1e-9 or abs(fk - k) > 1e-9:
            return None
        if not (0 <= j < self.n and 0 <= k < self.n):
            return None
        return j, k

    def boundary_mask(self, width: int = 1) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[:width, :] = mask[-width:, :] = True
        mask[:, :width] = mask[:, -width:] = True
        return mask

    def to_header(self) -> dict:
        return {
            "center_re": self.center.real,
            "center_im": self.center.imag,
            "R": self.R,
            "n": self.n,
        }


def make_grid(center: complex = 0.0, R: float = 8.0, n: int = 512) -> GridSpec:
    return GridSpec(center, R, n)


@dataclass(frozen=True)
class SampledField:
    grid: GridSpec
    values: np.ndarray
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.shape != self.grid.shape:
            raise InvalidParameter(
                f"values shape {values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))
            raise NonFiniteValue(
                f"field {self.label!r} has {len(bad)} non-finite samples, first at {tuple(bad[0])}"
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __add__(self, other: "SampledField") -> "SampledField":
        _same_grid(self, other)
        return SampledField(self.grid, self.values + other.values, f"({self.label}+{other.label})")

    def __sub__(self, other: "SampledField") -> "SampledField":
        _same_grid(self, other)
        return SampledField(self.grid, self.values - other.values, f"({self.label}-{other.label})")

    def scaled(self, c: complex) -> "SampledField":
        return SampledField(self.grid, c * self.values, f"{c}*{self.label}")

    def with_values(self, values, label=None) -> "SampledField":
        return SampledField(self.grid, values, self.label if label is None else label)

    def sup(self, mask=None) -> float:
        v = np.abs(self.values if mask is None else self.values[mask])
        return float(v.max()) if v.size else 0.0

    def l2(self, mask=None) -> float:
        return l2_norm(self.values, self.grid, mask)


def _same_grid(a: SampledField, b: SampledField):
    if a.grid != b.grid:
        raise InvalidParameter("fields live on different grids")


def l2_norm(values: np.ndarray, grid: GridSpec, mask=None) -> float:
    """Discrete L^2 norm ``sqrt(h^2 * sum |v|^2)`` over the (masked) lattice."""
    v = np.asarray(values)
    if mask is not None:
        v = v[mask]
    return float(grid.h * np.sqrt(np.sum(np.abs(v) ** 2)))


def lp_norm(values: np.ndarray, grid: GridSpec, p: float, mask=None) -> float:
    """Discrete L^p norm ``(h^2 * sum |v|^p)^(1/p)``; ``p = inf`` gives the sup."""
    v = np.abs(np.asarray(values))
    if mask is not None:
        v = v[mask]
    if np.isinf(p):
        return float(v.max()) if v.size else 0.0
    if p < 1:
        raise InvalidParameter(f"p must be >= 1, got {p}")
    return float((grid.h ** 2 * np.sum(v ** p)) ** (1.0 / p))


def sample_map(fn: Callable, grid: GridSpec, label: str | None = None) -> SampledField:
    """Evaluate a vectorized complex map on every lattice point."""
    z = grid.lattice()
    values = np.broadcast_to(np.asarray(fn(z), dtype=complex), z.shape)
    if label is None:
        label = getattr(fn, "label", None) or getattr(fn, "__name__", "map")
    return SampledField(grid, values, label)


def region_mask(grid: GridSpec, region=None) -> np.ndarray:
    """Boolean lattice mask from a predicate on ``z``, a mask, or ``None`` (everything)."""
    if region is None:
        return np.ones(grid.shape, dtype=bool)
    if callable(region):
        mask = np.asarray(region(grid.lattice()), dtype=bool)
    else:
        mask = np.asarray(region, dtype=bool)
    if mask.shape != grid.shape:
        raise InvalidParameter("region mask shape does not match the grid")
    return mask


def annulus(r_in: float, r_out: float, center: complex = 0.0):
    """Predicate for the open annulus ``r_in < |z - center| < r_out``."""

    def predicate(z):
        r = np.abs(np.asarray(z) - center)
        return (r > r_in) & (r < r_out)

    predicate.__name__ = f"annulus({r_in},{r_out})"
    return predicate


def erode(mask: np.ndarray, steps: int = 1) -> np.ndarray:
    """Points of ``mask`` whose 5-point stencil neighbours (applied ``steps`` times) stay in it."""
    out = np.asarray(mask, dtype=bool).copy()
    for _ in range(steps):
        inner = out.copy()
        inner[1:, :] &= out[:-1, :]
        inner[:-1, :] &= out[1:, :]
        inner[:, 1:] &= out[:, :-1]
        inner[:, :-1] &= out[:, 1:]
        inner[0, :] = inner[-1, :] = inner[:, 0] = inner[:, -1] = False
        out = inner
    return out
