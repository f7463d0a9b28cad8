import numpy as np
import pytest

from nlbeltrami import (ClosedFormBeltrami, ExactMapId, InvalidParameter, KirszbraunBeltrami,
                        LinearBeltrami, MapKind, NoConvergence, PathGamma, affine_fixed_point,
                        affine_solution, build_flow, change_of_variables, eval_exact,
                        imaginary_part_structure, make_grid, residual, sample_exact, sample_map,
                        segment_distance_structure, solve_inhomogeneous, truncation_sensitivity,
                        windowed_linear, zero_structure)
from nlbeltrami.exact import composed_bound, exact_pair, invert_exact
from nlbeltrami.solvers import transported_structure

GRID = make_grid(0, 8.0, 64)


def test_zero_field_solves_in_one_iteration():
    sol = solve_inhomogeneous(zero_structure(), 1.0, GRID)
    assert sol.iterations == 1
    assert not np.any(sol.omega.values) and not np.any(sol.eta.values)


def test_h4_field_with_gamma_one_is_trivial():
    sol = solve_inhomogeneous(segment_distance_structure(0.5, 8.0), 1.0, GRID)
    assert not np.any(sol.omega.values) and not np.any(sol.eta.values)


def test_contraction_ratio_for_linear_field():
    grid = make_grid(0, 8.0, 128)
    sol = solve_inhomogeneous(windowed_linear(0.3, 8.0), 1.0, grid, tol=1e-10)
    assert max(sol.ratios[1:]) <= 0.32
    assert sol.residual < 1e-9


def test_nonlinear_contraction_respects_k():
    H = ClosedFormBeltrami(lambda z, w: 0.4 * np.tanh(np.abs(w)) * np.exp(1j * z.real),
                           0.4, name="nonlinear")
    sol = solve_inhomogeneous(H, 0.7 + 0.2j, GRID, tol=1e-11)
    assert max(sol.ratios) <= 0.4 + 1e-9
    assert sol.residual < 1e-9


def test_eta_vanishes_at_base_point():
    sol = solve_inhomogeneous(windowed_linear(0.3, 8.0), 1.0 + 0.5j, GRID, z0=2.0)
    assert sol.eta.values[GRID.index_of(2.0)] == 0


def test_mean_mode_is_carried_explicitly():
    # constant mu: omega has a nonzero mean which the periodic potential cannot absorb
    H = LinearBeltrami(0.3, k_bound=0.3)
    sol = solve_inhomogeneous(H, 1.0, GRID, tol=1e-12)
    assert sol.mean_mode == pytest.approx(0.3)
    z = GRID.lattice()
    assert np.allclose(sol.eta.values, 0.3 * np.conj(z), atol=1e-12)
    assert sol.residual < 1e-12


def test_no_convergence_is_reported():
    with pytest.raises(NoConvergence) as info:
        solve_inhomogeneous(windowed_linear(0.9, 8.0), 1.0, GRID, tol=1e-14, max_iter=3)
    assert info.value.iterations == 3


def test_rejects_non_elliptic_bound():
    with pytest.raises(InvalidParameter):
        ClosedFormBeltrami(lambda z, w: w, 1.0)


# --- flows -----------------------------------------------------------------------

def test_flow_endpoints():
    tol = 1e-10
    H = segment_distance_structure(0.5, 8.0)
    gamma = PathGamma.from_function(lambda s: s + 0.8j * s * (1 - s))
    flow = build_flow(H, gamma, np.linspace(0, 1, 6), GRID, tol=tol)
    assert not np.any(flow.psi[0].values)
    identity = sample_map(lambda z: z, GRID)
    assert (flow.psi[-1] - identity).sup() <= 10 * tol
    assert all(p.values[GRID.index_of(0.0)] == 0 for p in flow.psi)


@pytest.mark.parametrize("H", [segment_distance_structure(0.6, 8.0),
                               imaginary_part_structure(0.6, 8.0)])
def test_linear_solution_path(H):
    # both fields vanish on the real segment, so gamma(t) = t gives eta_t = 0 and psi_t = t z
    flow = build_flow(H, PathGamma.segment(), [0.0, 0.25, 0.5, 1.0], GRID)
    z = GRID.lattice()
    for t, psi, eta in zip(flow.times, flow.psi, flow.eta):
        assert not np.any(eta.values)
        assert np.array_equal(psi.values, t * z)


def test_flow_needs_h3_h4():
    with pytest.raises(InvalidParameter):
        build_flow(windowed_linear(0.3, 8.0), PathGamma.segment(), [0, 1], GRID)


def test_path_validation():
    with pytest.raises(InvalidParameter):
        PathGamma(((0.0, 0j), (1.0, 2.0)))
    with pytest.raises(InvalidParameter):
        PathGamma(((0.2, 0j), (1.0, 1.0)))
    g = PathGamma(((0.0, 0j), (0.5, 1j), (1.0, 1 + 0j)))
    assert g(0.25) == pytest.approx(0.5j)


# --- affine theory -----------------------------------------------------------------

def _kw(k):
    return ClosedFormBeltrami(lambda z, w: k * w, k, name="kw", z_independent=True)


@pytest.mark.parametrize("k", [0.1, 0.25, 0.5])
def test_affine_fixed_point(k):
    a = affine_fixed_point(_kw(k))
    assert abs(a - 1 / (1 + k)) <= 1e-12
    assert a + k * a == pytest.approx(1.0, abs=1e-15)
    sol = affine_solution(_kw(k), a)
    assert eval_exact(sol, 1.0) == pytest.approx(1.0, abs=1e-14)
    grid = make_grid(0, 4.0, 32)
    assert residual(_kw(k), sample_exact(sol, grid)).sup <= 1e-13


def test_affine_zero_field_is_identity():
    a = affine_fixed_point(zero_structure())
    assert a == 1
    assert affine_solution(zero_structure(), a).b == 0


def test_affine_conjugate_linear():
    H = ClosedFormBeltrami(lambda z, w: 0.4 * np.conj(w), 0.4, z_independent=True)
    a = affine_fixed_point(H)
    assert a.imag == 0 and a == pytest.approx(5 / 7, abs=1e-14)
    sol = affine_solution(H, a)
    z = 1.3 - 0.7j
    assert eval_exact(sol, z) == pytest.approx((z + 0.4 * np.conj(z)) / 1.4)


def test_affine_needs_z_independent_field():
    with pytest.raises(InvalidParameter):
        affine_fixed_point(windowed_linear(0.3, 8.0))


# --- change of variables -------------------------------------------------------------

def test_change_of_variables_identity_map(rng):
    H = ClosedFormBeltrami(lambda z, w: 0.3 * np.conj(w) * np.exp(1j * z.real), 0.3)
    ident = ExactMapId(MapKind.affine, a=1.0, b=0.0, c=0.0)
    for u, w in zip(rng.normal(size=10) + 1j * rng.normal(size=10), rng.normal(size=10) * 2):
        assert change_of_variables(H, ident, u, w) == pytest.approx(H.scalar(u, w), abs=1e-13)


def test_change_of_variables_kills_anchors_and_contracts(rng):
    t = 0.1
    f = ExactMapId(MapKind.f_t, t=t)
    H = KirszbraunBeltrami(t)
    bound = composed_bound(H.k_bound)
    worst = 0.0
    for u in rng.uniform(-6, 6, 10) + 1j * rng.uniform(-6, 6, 10):
        z = complex(invert_exact(f, u))
        assert change_of_variables(H, f, u, 0.0, z=z) == 0
        assert abs(change_of_variables(H, f, u, 1.0, z=z)) <= 1e-10
        w1, w2 = 3 * (rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2))
        q1 = change_of_variables(H, f, u, w1, z=z)
        q2 = change_of_variables(H, f, u, w2, z=z)
        worst = max(worst, abs(q1 - q2) / abs(w1 - w2))
    assert worst <= bound + 0.01


def test_transported_structure_vectorizes():
    H = _kw(0.2)
    f = ExactMapId(MapKind.affine, a=1.0, b=0.1, c=0.0)
    Ht = transported_structure(H, f, composed_bound(0.3))
    u = np.array([0.5, 1 + 1j])
    out = Ht(u, np.array([0.0, 1.0]))
    assert out[0] == 0
    single = change_of_variables(H, f, u[1], 1.0)
    assert out[1] == single


# --- residuals ---------------------------------------------------------------------

def test_identity_under_h4_has_zero_residual():
    grid = make_grid(0, 8.0, 32)
    res = residual(segment_distance_structure(0.5, 8.0), sample_map(lambda z: z, grid))
    assert res.sup == 0.0 and res.l2 == 0.0


@pytest.mark.parametrize("kind", [MapKind.f_t, MapKind.g_t])
def test_counterexample_residuals_vanish(kind):
    grid = make_grid(0, 8.0, 32)
    m = ExactMapId(kind, t=0.1)
    res = residual(KirszbraunBeltrami(0.1), sample_exact(m, grid), exact_pair(m, grid))
    assert res.sup <= 1e-9


def test_lp_norms_reported_for_d_eta():
    H = windowed_linear(0.3, 2.0)
    sol = solve_inhomogeneous(H, 1.0, GRID)
    norms = sol.lp_norms()
    assert set(norms) == {"1.5", "2.0", "4.0", "inf"}
    assert norms["inf"] == pytest.approx(np.abs(sol.d_eta.values).max())
    # d eta = S omega is an L^2 isometry of omega up to the mean mode
    om = sol.omega.values
    assert norms["2.0"] == pytest.approx(
        GRID.h * np.sqrt(np.sum(np.abs(om - om.mean()) ** 2)), rel=1e-9)


def test_zero_structure_is_insensitive_to_truncation():
    rep = truncation_sensitivity(zero_structure(), 1.0, 4.0, 32)
    assert rep.sup_diff == 0 and rep.rel_l2_diff == 0


def test_truncation_sensitivity_decays_like_inverse_radius():
    # eta has a 1/z tail, so the periodization error halves when R doubles
    H = windowed_linear(0.5, 2.0)
    a = truncation_sensitivity(H, 1.0, 4.0, 64)
    b = truncation_sensitivity(H, 1.0, 8.0, 128)
    assert b.sup_diff / a.sup_diff == pytest.approx(0.5, abs=0.05)
    assert b.eta_sup == pytest.approx(a.eta_sup, rel=1e-3)
