"""Numerical Wirtinger derivatives and pointwise distortion of sampled maps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter
from .fields import SampledField, region_mask
from .transforms import apply_multiplier, spectral_grid

METHODS = ("centered_fd", "spectral")


@dataclass(frozen=True)
class WirtingerPair:
    """``(d f, dbar f)`` on a shared grid.

    ``valid`` marks points where the derivatives carry the scheme's full
    order; one-sided boundary rows of ``centered_fd`` are excluded.
    """

    d: SampledField
    dbar: SampledField
    method: str = "exact"
    valid: np.ndarray | None = None

    def __post_init__(self):
        if self.d.grid != self.dbar.grid:
            raise InvalidParameter("d and dbar must share a grid")
        if self.valid is None:
            object.__setattr__(self, "valid", np.ones(self.d.grid.shape, dtype=bool))

    @property
    def grid(self):
        return self.d.grid


def _fd_partials(values, h):
    fx = np.gradient(values, h, axis=0, edge_order=1)
    fy = np.gradient(values, h, axis=1, edge_order=1)
    return fx, fy


def wirtinger(f: SampledField, method: str = "centered_fd") -> WirtingerPair:
    grid = f.grid
    if method == "centered_fd":
        fx, fy = _fd_partials(f.values, grid.h)
        d = 0.5 * (fx - 1j * fy)
        dbar = 0.5 * (fx + 1j * fy)
        valid = ~grid.boundary_mask()
    elif method == "spectral":
        sg = spectral_grid(grid)
        coeffs = np.fft.fft2(f.values)
        d = np.fft.ifft2(sg.d_multiplier * coeffs)
        dbar = np.fft.ifft2(sg.dbar_multiplier * coeffs)
        valid = None
    else:
        raise InvalidParameter(f"unknown method {method!r}; expected one of {METHODS}")
    return WirtingerPair(
        SampledField(grid, d, f"d[{f.label}]"),
        SampledField(grid, dbar, f"dbar[{f.label}]"),
        method,
        valid,
    )


def spectral_dbar(values, grid):
    return apply_multiplier(values, spectral_grid(grid).dbar_multiplier)


@dataclass(frozen=True)
class DistortionField:
    k_field: np.ndarray
    K_field: np.ndarray
    sup_k: float
    sup_K: float
    region: np.ndarray
    masked_points: list = field(default_factory=list)
    argmax: complex | None = None


def distortion(pair: WirtingerPair, region=None, eps_div: float = 1e-12,
               include_boundary: bool = False) -> DistortionField:
    """Pointwise ``k = |dbar f| / |d f|`` and ``K = (1 + k) / (1 - k)``.

    Points where ``|d f|`` falls below ``eps_div`` times the field scale are
    masked, excluded from the suprema, and listed in ``masked_points``.
    Entries outside the region are NaN.
    """
    grid = pair.grid
    mask = region_mask(grid, region)
    if not include_boundary:
        mask = mask & pair.valid
    d = pair.d.values
    dbar = pair.dbar.values
    absd = np.abs(d)
    scale = absd[mask].max() if mask.any() else 0.0
    degenerate = mask & (absd <= eps_div * max(scale, np.finfo(float).tiny))
    use = mask & ~degenerate

    k = np.full(grid.shape, np.nan)
    k[use] = np.abs(dbar[use]) / absd[use]
    K = np.full(grid.shape, np.nan)
    with np.errstate(divide="ignore"):
        K[use] = np.where(k[use] < 1, (1 + k[use]) / (1 - k[use]), np.inf)

    lattice = grid.lattice()
    masked = [complex(z) for z in lattice[degenerate]]
    if use.any():
        i = np.nanargmax(np.where(use, k, -np.inf))
        sup_k = float(k.flat[i])
        sup_K = float(np.max(K[use]))
        arg = complex(lattice.flat[i])
    else:
        sup_k, sup_K, arg = float("nan"), float("nan"), None
    return DistortionField(k, K, sup_k, sup_K, use, masked, arg)
