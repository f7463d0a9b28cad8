"""Fixed-point solvers for linear and nonlinear Beltrami equations.

The inhomogeneous equation ``dbar eta = H(z, d eta + gamma)`` is solved for
the density ``omega = dbar eta`` by Picard iteration
``omega <- H(z, S omega + gamma)`` on the periodized grid, where ``S`` is the
Beurling transform.  Its ``L^2`` norm is at most one, so the iteration
contracts with ratio ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .derivatives import WirtingerPair, wirtinger
from .errors import DegenerateJacobian, InvalidParameter, NoConvergence
from .exact import ExactMapId, MapKind, invert_exact, wirtinger_exact
from .fields import GridSpec, SampledField, l2_norm, lp_norm, make_grid, region_mask
from .structures import BeltramiStructure, ClosedFormBeltrami
from .transforms import apply_multiplier, cauchy_solve, spectral_grid

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 500


@dataclass(frozen=True)
class InhomogeneousSolution:
    eta: SampledField
    omega: SampledField
    iterations: int
    residual: float
    differences: list
    mean_mode: complex = 0j
    d_eta: SampledField | None = None

    def lp_norms(self, ps=(1.5, 2.0, 4.0, np.inf)) -> dict:
        """Empirical ``L^p`` norms of ``d eta`` on the lattice."""
        if self.d_eta is None:
            return {}
        g = self.d_eta.grid
        return {str(p): lp_norm(self.d_eta.values, g, p) for p in ps}

    @property
    def ratios(self) -> list:
        d = self.differences
        return [d[i + 1] / d[i] for i in range(len(d) - 1) if d[i] > 0]


def _potential(omega: SampledField, z0: complex):
    """Potential with ``dbar eta = omega`` exactly: periodic part plus ``mean * conj(z - z0)``."""
    per = cauchy_solve(omega, z0)
    mean = per.meta["mean"]
    z = omega.grid.lattice()
    values = per.values + mean * np.conj(z - z0)
    return per, mean, SampledField(omega.grid, values, f"eta[{omega.label}]", meta={"mean": mean})


def solve_inhomogeneous(H: BeltramiStructure, gamma_t: complex, grid: GridSpec,
                        tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                        z0: complex = 0.0) -> InhomogeneousSolution:
    """Solve ``dbar eta = H(z, d eta + gamma_t)`` with ``eta(z0) = 0``.

    Iterates from ``omega_0 = H(z, gamma_t)`` until successive densities differ
    by less than ``tol`` in discrete ``L^2``.  The mean of ``omega`` is carried
    by an explicit ``mean * conj(z)`` term, since a periodic potential cannot
    absorb it; the returned residual uses spectral derivatives of the
    periodic part.
    """
    if not H.k_bound < 1:
        raise InvalidParameter("ellipticity bound must be < 1")
    gamma_t = complex(gamma_t)
    z = grid.lattice()
    mult = spectral_grid(grid).beurling_multiplier
    omega = np.asarray(H(z, np.full(z.shape, gamma_t)), dtype=complex)
    diffs = []
    converged = False
    for it in range(1, max_iter + 1):
        new = np.asarray(H(z, apply_multiplier(omega, mult) + gamma_t), dtype=complex)
        diff = l2_norm(new - omega, grid)
        diffs.append(diff)
        omega = new
        if diff < tol:
            converged = True
            break
    if not converged:
        tail = [diffs[i + 1] / diffs[i] for i in range(max(0, len(diffs) - 6), len(diffs) - 1)
                if diffs[i] > 0]
        ratio = max(tail) if tail else float("nan")
        raise NoConvergence(f"no convergence after {max_iter} iterations "
                            f"(last difference {diffs[-1]:.3e}, contraction ratio {ratio:.4f})",
                            iterations=max_iter, contraction_ratio=ratio)
    omega_f = SampledField(grid, omega, "omega")
    per, mean, eta = _potential(omega_f, z0)
    sg = spectral_grid(grid)
    coeffs = np.fft.fft2(per.values)
    d_eta = np.fft.ifft2(sg.d_multiplier * coeffs)
    dbar_eta = np.fft.ifft2(sg.dbar_multiplier * coeffs) + mean
    res = dbar_eta - H(z, d_eta + gamma_t)
    d_field = SampledField(grid, d_eta, "d_eta")
    return InhomogeneousSolution(eta, omega_f, it, l2_norm(res, grid), diffs, mean, d_field)


@dataclass(frozen=True)
class TruncationReport:
    R: float
    n: int
    sup_diff: float
    rel_l2_diff: float
    eta_sup: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def truncation_sensitivity(H: BeltramiStructure, gamma_t: complex, R: float, n: int,
                           tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                           z0: complex = 0.0) -> TruncationReport:
    """Compare ``eta`` solved on ``[-R, R]^2`` and on ``[-2R, 2R]^2`` at equal spacing.

    The small lattice is an exact sublattice of the large one, so the two
    solutions are compared pointwise on the common square.
    """
    small = solve_inhomogeneous(H, gamma_t, make_grid(0, R, n), tol, max_iter, z0)
    large = solve_inhomogeneous(H, gamma_t, make_grid(0, 2 * R, 2 * n), tol, max_iter, z0)
    q = n // 2
    inner = large.eta.values[q:q + n, q:q + n]
    diff = small.eta.values - inner
    scale = l2_norm(inner, small.eta.grid)
    rel = l2_norm(diff, small.eta.grid) / scale if scale > 0 else float(l2_norm(diff, small.eta.grid))
    return TruncationReport(float(R), int(n), float(np.abs(diff).max()), float(rel),
                            float(np.abs(inner).max()))


@dataclass(frozen=True)
class PathGamma:
    """Piecewise-linear path through ``samples`` of ``(t, gamma(t))`` from 0 to 1."""

    samples: tuple

    def __post_init__(self):
        pts = tuple(sorted((float(t), complex(g)) for t, g in self.samples))
        object.__setattr__(self, "samples", pts)
        if len(pts) < 2 or pts[0][0] != 0.0 or pts[-1][0] != 1.0:
            raise InvalidParameter("path samples must start at t = 0 and end at t = 1")
        if pts[0][1] != 0 or pts[-1][1] != 1:
            raise InvalidParameter("path must satisfy gamma(0) = 0 and gamma(1) = 1")

    @classmethod
    def from_function(cls, fn, m: int = 101):
        ts = np.linspace(0.0, 1.0, m)
        vals = [complex(fn(t)) for t in ts]
        vals[0], vals[-1] = 0j, 1 + 0j
        return cls(tuple(zip(ts.tolist(), vals)))

    @classmethod
    def segment(cls):
        return cls(((0.0, 0j), (1.0, 1 + 0j)))

    def __call__(self, t):
        ts = np.array([p[0] for p in self.samples])
        gs = np.array([p[1] for p in self.samples])
        return complex(np.interp(t, ts, gs.real) + 1j * np.interp(t, ts, gs.imag))


@dataclass(frozen=True)
class FlowFamily:
    times: list
    psi: list
    eta: list
    gamma: PathGamma
    residuals: list = field(default_factory=list)
    sup_norms: list = field(default_factory=list)
    iterations: list = field(default_factory=list)

    @property
    def grid(self) -> GridSpec:
        return self.psi[0].grid


def build_flow(H: BeltramiStructure, gamma: PathGamma, times, grid: GridSpec,
               tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> FlowFamily:
    """Flow ``psi_t = gamma(t) z + eta_t - eta_t(0)`` joining 0 to the identity."""
    if not (H.satisfies_h3 and H.satisfies_h4):
        raise InvalidParameter("flow construction needs H(z, 0) = 0 and H(z, 1) = 0")
    if grid.index_of(0.0) is None:
        raise InvalidParameter("the grid must contain the origin")
    z = grid.lattice()
    times = [float(t) for t in times]
    psis, etas, residuals, sups, iters = [], [], [], [], []
    for t in times:
        g = gamma(t)
        try:
            sol = solve_inhomogeneous(H, g, grid, tol, max_iter)
        except NoConvergence as exc:
            exc.tag = t
            raise
        eta = sol.eta
        eta0 = eta.values[grid.index_of(0.0)]
        psis.append(SampledField(grid, g * z + eta.values - eta0, f"psi[t={t:g}]"))
        etas.append(eta)
        residuals.append(sol.residual)
        sups.append(eta.sup())
        iters.append(sol.iterations)
    return FlowFamily(times, psis, etas, gamma, residuals, sups, iters)


def _as_scalar_map(H):
    if isinstance(H, BeltramiStructure):
        if not H.z_independent:
            raise InvalidParameter("affine solutions need a z-independent field")
        return lambda w: H.scalar(0.0, w)
    return lambda w: complex(H(w))


def affine_fixed_point(H, tol: float = 1e-15, max_iter: int = 100_000) -> complex:
    """Fixed point of ``w -> 1 - H(w)``; the normalized solution is ``a z + H(a) conj(z)``."""
    Hs = _as_scalar_map(H)
    if abs(Hs(0.0)) > 0:
        raise InvalidParameter("affine theory needs H(0) = 0")
    w = 1.0 + 0j
    for _ in range(max_iter):
        new = 1.0 - Hs(w)
        if abs(new - w) <= tol * max(1.0, abs(w)):
            return new
        w = new
    raise NoConvergence("affine iteration did not converge", iterations=max_iter)


def affine_solution(H, a: complex) -> ExactMapId:
    Hs = _as_scalar_map(H)
    return ExactMapId(MapKind.affine, a=a, b=Hs(a), c=0.0)


def change_of_variables(H: BeltramiStructure, f: ExactMapId, u: complex, phi_u: complex,
                        tol: float = 1e-12, max_iter: int = 1000, z: complex | None = None,
                        jac_tol: float = 1e-14) -> complex:
    """Solve the transported relation for ``Phi_ubar`` given ``Phi_u`` at ``u = f(z)``.

    Iterates ``Q <- (H(z, f_z P + conj(f_zbar) Q) - f_zbar P) / conj(f_z)``
    from ``Q = 0``; the map ``P -> Q`` is the transported field ``H~(u, .)``.
    """
    u, P = complex(u), complex(phi_u)
    if z is None:
        z = complex(invert_exact(f, u))
    fz, fzb = wirtinger_exact(f, z)
    if abs(fz) <= jac_tol:
        raise DegenerateJacobian(f"|f_z| = {abs(fz):.3e} at z = {z}")
    q = 0j
    for _ in range(max_iter):
        new = (H.scalar(z, fz * P + np.conj(fzb) * q) - fzb * P) / np.conj(fz)
        if abs(new - q) <= tol * max(1.0, abs(new)):
            return complex(new)
        q = new
    raise NoConvergence("change of variables did not converge", iterations=max_iter)


def transported_structure(H: BeltramiStructure, f: ExactMapId, k_bound: float) -> ClosedFormBeltrami:
    """``H~(u, w)`` as a structure; ``k_bound`` is the caller's ellipticity claim."""

    def Ht(u, w):
        u, w = np.broadcast_arrays(np.asarray(u, dtype=complex), np.asarray(w, dtype=complex))
        out = np.empty(u.shape, dtype=complex)
        for idx in np.ndindex(u.shape):
            out[idx] = change_of_variables(H, f, u[idx], w[idx])
        return out

    return ClosedFormBeltrami(Ht, k_bound, True, True, name=f"transport[{H.name},{f.label}]")


@dataclass(frozen=True)
class Residual:
    l2: float
    sup: float
    field: SampledField


def residual(H: BeltramiStructure, f_samples: SampledField, pair: WirtingerPair | None = None,
             method: str = "centered_fd", region=None) -> Residual:
    """Pointwise ``dbar f - H(z, d f)`` and its norms over valid region points.

    Pass ``pair`` (e.g. from ``exact_pair``) to use closed-form derivatives.
    """
    if pair is None:
        pair = wirtinger(f_samples, method)
    grid = f_samples.grid
    mask = region_mask(grid, region) & pair.valid
    z = grid.lattice()
    res = np.zeros(grid.shape, dtype=complex)
    res[mask] = pair.dbar.values[mask] - H(z[mask], pair.d.values[mask])
    field_ = SampledField(grid, res, f"residual[{f_samples.label}]")
    return Residual(l2_norm(res, grid, mask), field_.sup(mask), field_)
