import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlbeltrami import SampledField, beurling, cauchy_solve, cutoff, make_grid, wirtinger
from nlbeltrami.fields import l2_norm


def _bump(grid, sigma):
    z = grid.lattice()
    phi = np.exp(-np.abs(z) ** 2 / (2 * sigma**2))
    return phi, -np.conj(z) / (2 * sigma**2) * phi, -z / (2 * sigma**2) * phi


def test_zero_maps_to_zero():
    g = make_grid(0, 2.0, 16)
    assert not np.any(beurling(SampledField(g, np.zeros(g.shape))).values)
    assert not np.any(cauchy_solve(SampledField(g, np.zeros(g.shape))).values)


def test_bump_identity():
    g = make_grid(0, 8.0, 256)
    phi, d_phi, dbar_phi = _bump(g, 1.0)
    S = beurling(SampledField(g, dbar_phi)).values
    assert l2_norm(S - d_phi, g) / l2_norm(d_phi, g) < 1e-6


@pytest.mark.parametrize("kx,ky", [(1, 2), (-3, 1), (0, 5)])
def test_single_mode(kx, ky):
    g = make_grid(0, 2.0, 32)
    z = g.lattice()
    zeta = (2 * np.pi / (2 * g.R)) * complex(kx, ky)
    mode = np.exp(1j * (zeta.real * z.real + zeta.imag * z.imag))
    out = beurling(SampledField(g, mode)).values
    assert np.allclose(out, np.conj(zeta) / zeta * mode, atol=1e-12)
    assert np.allclose(np.abs(out), 1.0, atol=1e-12)


def test_mean_mode_is_annihilated():
    g = make_grid(0, 1.0, 16)
    assert np.max(np.abs(beurling(SampledField(g, np.full(g.shape, 2 + 1j))).values)) < 1e-15


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([8, 16, 64]))
def test_isometry_on_mean_zero_fields(seed, n):
    rng = np.random.default_rng(seed)
    g = make_grid(0, 3.0, n)
    w = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
    w -= w.mean()
    out = beurling(SampledField(g, w)).values
    assert abs(l2_norm(out, g) - l2_norm(w, g)) <= 1e-12 * l2_norm(w, g)


def test_linearity(rng):
    g = make_grid(0, 1.0, 32)
    a = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
    b = rng.normal(size=g.shape)
    c = 0.7 - 0.2j
    lhs = beurling(SampledField(g, c * a + b)).values
    rhs = c * beurling(SampledField(g, a)).values + beurling(SampledField(g, b)).values
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_conjugated_transform_is_inverse(rng):
    # conj(S(conj(v))) has multiplier zeta / conj(zeta), the inverse of S on mean-zero
    # fields; reflection fixes the Nyquist index, so the field is band-limited below it
    g = make_grid(0, 1.0, 32)
    coeffs = np.fft.fft2(rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
    coeffs[0, 0] = 0
    coeffs[g.n // 2, :] = coeffs[:, g.n // 2] = 0
    w = np.fft.ifft2(coeffs)
    S = beurling(SampledField(g, w)).values
    back = np.conj(beurling(SampledField(g, np.conj(S))).values)
    assert np.max(np.abs(back - w)) < 1e-12


def test_cauchy_round_trip_on_bump():
    g = make_grid(0, 8.0, 256)
    phi, _, dbar_phi = _bump(g, 1.0)
    eta = cauchy_solve(SampledField(g, dbar_phi), z0=0.0)
    target = phi - phi[g.index_of(0.0)]
    assert l2_norm(eta.values - target, g) / l2_norm(target, g) < 1e-6
    assert eta.values[g.index_of(0.0)] == 0


def test_cauchy_inverts_dbar_spectrally(rng):
    g = make_grid(0, 1.0, 32)
    w = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
    eta = cauchy_solve(SampledField(g, w), z0=0.3 + 0.1j)
    assert eta.meta["mean"] == pytest.approx(w.mean())
    dbar = wirtinger(eta, "spectral").dbar.values
    assert np.max(np.abs(dbar - (w - w.mean()))) < 1e-10
    assert abs(eta.meta["z0"] - (0.3 + 0.1j)) == 0


def test_cutoff_window():
    R = 10.0
    assert cutoff(0.0, R) == 1.0 and cutoff(8.0, R) == 1.0
    assert cutoff(9.5, R) == 0.0 and cutoff(20.0, R) == 0.0
    r = np.linspace(0, 12, 500)
    c = cutoff(r, R)
    assert np.all(np.diff(c) <= 0) and np.all((0 <= c) & (c <= 1))
