"""Beurling and Cauchy transforms on the periodized grid, as Fourier multipliers.

The grid square ``[-R, R)^2`` is treated as one period of a torus.  With
``zeta = xi_1 + i xi_2`` the lattice frequency, the Wirtinger derivatives act
as ``d <-> i conj(zeta) / 2`` and ``dbar <-> i zeta / 2``, so the Beurling
transform (which sends ``dbar phi`` to ``d phi``) has multiplier
``conj(zeta) / zeta``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fields import GridSpec, SampledField


@dataclass(frozen=True)
class SpectralGrid:
    grid: GridSpec
    frequencies: np.ndarray

    @property
    def d_multiplier(self) -> np.ndarray:
        return 0.5j * np.conj(self.frequencies)

    @property
    def dbar_multiplier(self) -> np.ndarray:
        return 0.5j * self.frequencies

    @property
    def beurling_multiplier(self) -> np.ndarray:
        return _beurling_multiplier(self.grid)


@lru_cache(maxsize=16)
def _frequencies(grid: GridSpec) -> np.ndarray:
    xi = 2.0 * np.pi * np.fft.fftfreq(grid.n, d=grid.h)
    X1, X2 = np.meshgrid(xi, xi, indexing="ij")
    zeta = X1 + 1j * X2
    zeta.flags.writeable = False
    return zeta


@lru_cache(maxsize=16)
def _beurling_multiplier(grid: GridSpec) -> np.ndarray:
    zeta = _frequencies(grid)
    m = np.zeros_like(zeta)
    nz = zeta != 0
    m[nz] = np.conj(zeta[nz]) / zeta[nz]
    m.flags.writeable = False
    return m


def spectral_grid(grid: GridSpec) -> SpectralGrid:
    return SpectralGrid(grid, _frequencies(grid))


def apply_multiplier(values: np.ndarray, multiplier: np.ndarray) -> np.ndarray:
    return np.fft.ifft2(multiplier * np.fft.fft2(values))


def beurling(omega: SampledField) -> SampledField:
    """Periodic Beurling transform; the mean mode is sent to zero."""
    out = apply_multiplier(omega.values, _beurling_multiplier(omega.grid))
    return SampledField(omega.grid, out, f"S[{omega.label}]")


def trig_eval(coeffs: np.ndarray, grid: GridSpec, z0: complex) -> complex:
    """Evaluate the trigonometric interpolant with FFT coefficients ``coeffs`` at ``z0``."""
    zeta = _frequencies(grid)
    dx = z0.real - grid.x[0]
    dy = z0.imag - grid.y[0]
    phase = np.exp(1j * (zeta.real * dx + zeta.imag * dy))
    return complex(np.sum(coeffs * phase) / coeffs.size)


def cauchy_solve(omega: SampledField, z0: complex = 0.0) -> SampledField:
    """Periodic potential ``eta`` with ``dbar eta = omega - mean(omega)`` and ``eta(z0) = 0``.

    The removed mean is stored in ``meta["mean"]``.
    """
    grid = omega.grid
    zeta = _frequencies(grid)
    coeffs = np.fft.fft2(omega.values)
    mean = complex(coeffs[0, 0] / coeffs.size)
    eta_hat = np.zeros_like(coeffs)
    nz = zeta != 0
    eta_hat[nz] = coeffs[nz] / (0.5j * zeta[nz])
    idx = grid.index_of(z0)
    eta = np.fft.ifft2(eta_hat)
    offset = eta[idx] if idx is not None else trig_eval(eta_hat, grid, complex(z0))
    eta = eta - offset
    return SampledField(grid, eta, f"C[{omega.label}]", meta={"mean": mean, "z0": complex(z0)})


def _smoothstep(s):
    # C-infinity transition from 0 (s <= 0) to 1 (s >= 1)
    s = np.clip(s, 0.0, 1.0)
    a = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
    b = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return a / (a + b)


def cutoff(z, R: float, inner: float = 0.8, outer: float = 0.95, center: complex = 0.0):
    """Smooth radial window: 1 on ``|z| <= inner R``, 0 on ``|z| >= outer R``."""
    r = np.abs(np.asarray(z) - center)
    s = (outer * R - r) / ((outer - inner) * R)
    return _smoothstep(s)
