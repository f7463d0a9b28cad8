import math

import numpy as np
import pytest

from nlbeltrami import (AliasingError, ExactMapId, FlowFamily, InvalidParameter, MapKind,
                        PathGamma, SampledField, ZeroOnTrace, argument_increment, build_flow,
                        check_flow_conditions, circle_trace, eval_exact, growth_exponent,
                        invert_exact, make_grid, modulus_crossing, modulus_ratio, sample_map,
                        segment_distance_structure, winding_number)
from nlbeltrami.exact import SQRT2
from nlbeltrami.topology import collision_probe, degree_about


def _diff(t=0.1):
    f, g = ExactMapId(MapKind.f_t, t=t), ExactMapId(MapKind.g_t, t=t)
    return lambda z: eval_exact(f, z) - eval_exact(g, z)


def test_identity_winds_once():
    total, w = argument_increment(circle_trace(lambda z: z, 1.0, 256))
    assert w == 1 and total == pytest.approx(2 * math.pi, abs=1e-12)


def test_nested_circle_pair():
    total, w = argument_increment(circle_trace(lambda z: 2 * z - z, 1.0, 256))
    assert w == 1 and abs(abs(total) - 2 * math.pi) <= 1e-6


@pytest.mark.parametrize("R", [1e2, 1e3])
def test_difference_winds_twice(R):
    assert winding_number(_diff(), R)[1] == 2


@pytest.mark.parametrize("m", [256, 512, 2048])
def test_winding_invariant_under_resampling(m):
    fn = lambda z: (z - 0.3) ** 3 * (z + 2)  # noqa: E731
    assert winding_number(fn, 1.0, m)[1] == 3
    assert winding_number(fn, 3.0, m)[1] == 4


def test_winding_additive_under_products():
    a = lambda z: (z - 0.5) ** 2  # noqa: E731
    b = lambda z: np.conj(z) - 0.1j  # noqa: E731
    wa = winding_number(a, 1.0)[1]
    wb = winding_number(b, 1.0)[1]
    assert winding_number(lambda z: a(z) * b(z), 1.0)[1] == wa + wb == 1


def test_aliasing_guard_and_resampling():
    fn = lambda z: z**40  # noqa: E731
    with pytest.raises(AliasingError):
        argument_increment(circle_trace(fn, 1.0, 64))
    total, w, m = winding_number(fn, 1.0, 64)
    assert w == 40 and m > 64


def test_zero_on_trace():
    with pytest.raises(ZeroOnTrace):
        argument_increment(circle_trace(lambda z: z - 1, 1.0, 64))


def test_trace_needs_enough_samples():
    with pytest.raises(InvalidParameter):
        circle_trace(lambda z: z, 1.0, 32)


def test_degree_about_regular_point():
    assert degree_about(lambda z: z**2, 1.0 + 0.5j, 1e-3) == 1
    assert degree_about(lambda z: z**2, 0.0, 1e-3) == 2


# --- modulus crossing ----------------------------------------------------------

def test_crossing_identity():
    theta = modulus_crossing(lambda z: z, 3.0)
    assert theta is not None
    assert abs(abs(3.0 * np.exp(1j * theta)) - 3.0) < 1e-10


def test_crossing_absent_for_dilation():
    assert modulus_crossing(lambda z: 2 * z, 1.0) is None


def test_crossing_of_composed_map():
    f, g = ExactMapId(MapKind.f_t, t=0.1), ExactMapId(MapKind.g_t, t=0.1)
    Phi = lambda u: eval_exact(g, invert_exact(f, u))  # noqa: E731
    R = 50.0
    theta = modulus_crossing(Phi, R)
    assert theta is not None
    assert abs(abs(Phi(np.array([R * np.exp(1j * theta)]))[0]) - R) < 1e-6 * R


# --- growth exponent -----------------------------------------------------------

def test_growth_of_square():
    fit = growth_exponent(lambda z: z * z, [1e1, 1e2, 1e3, 1e4])
    assert fit.alpha == pytest.approx(2.0, abs=1e-6)


def test_growth_of_radial_stretch():
    m = ExactMapId(MapKind.radial_stretch, K=SQRT2)
    fit = growth_exponent(lambda z: eval_exact(m, z), [1e1, 1e2, 1e3, 1e4])
    assert fit.alpha == pytest.approx(SQRT2, abs=1e-3)


def test_growth_invariant_under_scaling():
    fn = lambda z: z**3 + z  # noqa: E731
    radii = [2e1, 2e2, 2e3, 2e4]
    a = growth_exponent(fn, radii).alpha
    b = growth_exponent(lambda z: 7.5 * fn(z), radii).alpha
    assert a == pytest.approx(b, abs=1e-12)


def test_growth_of_difference_matches_closed_form():
    # |f_t - g_t| = t |w^2 - w| with |w| = rho = R^(1/sqrt2); the maximum on the circle is
    # t (rho^2 + rho) at w = -rho, so the finite-radius slope is the fit of that expression
    t, radii = 0.1, np.array([1e1, 1e2, 1e3, 1e4])
    rho = radii ** (1 / SQRT2)
    log_max = np.log(t * (rho**2 + rho))
    oracle = np.polyfit(np.log(radii), log_max, 1)[0]
    fit = growth_exponent(_diff(t), radii, m=4096)
    assert fit.alpha == pytest.approx(oracle, abs=1e-9)
    assert fit.local_slopes == pytest.approx(np.diff(log_max) / np.log(10), abs=1e-9)
    # the slopes approach sqrt2 from below as R grows
    assert np.all(np.diff(fit.local_slopes) > 0) and fit.local_slopes[-1] < SQRT2


def test_growth_needs_two_decades():
    with pytest.raises(InvalidParameter):
        growth_exponent(lambda z: z, [2.0, 3.0, 4.0, 5.0])


# --- collisions and flow conditions -------------------------------------------------

def test_collision_probe():
    g = make_grid(0, 1.0, 16)
    assert collision_probe(sample_map(lambda z: z, g))[1]
    assert not collision_probe(sample_map(lambda z: z * z, g))[1]  # z and -z collide


def _affine_flow(k=0.2, times=np.linspace(0, 1, 11)):
    a = 1 / (1 + k)
    grid = make_grid(0, 8.0, 32)
    z = grid.lattice()
    psi = [SampledField(grid, t * a * z + k * t * a * np.conj(z), f"psi{t}") for t in times]
    f = SampledField(grid, a * z + k * a * np.conj(z), "f")
    zero = SampledField(grid, np.zeros(grid.shape))
    gamma = PathGamma.segment()
    return FlowFamily(list(map(float, times)), psi, [zero] * len(psi), gamma), f


def test_affine_flow_passes_all_conditions():
    flow, f = _affine_flow()
    report = check_flow_conditions(flow, f, eps=0.6, R_list=[4.0], delta=0.15, tol=1e-12)
    assert report.all_ok
    # psi_t - psi_s over psi_t - f is (s - t) / (1 - t) exactly
    assert max(report.f3["sup_ratio"]) == pytest.approx(0.5, rel=1e-12)
    assert max(report.f2["sup_k"]) == pytest.approx(0.2, rel=1e-12)


def test_built_flow_passes_f1_f4():
    grid = make_grid(0, 8.0, 64)
    flow = build_flow(segment_distance_structure(0.5, 8.0),
                      PathGamma.from_function(lambda s: s + 0.5j * s * (1 - s)),
                      np.linspace(0, 1, 6), grid)
    report = check_flow_conditions(flow, sample_map(lambda z: z, grid), eps=0.5,
                                   R_list=[4.0, 6.0], delta=0.25, tol=1e-9)
    assert report.f1_ok and report.f4_ok
    assert all(np.isfinite(report.f2["sup_k"]))


def test_negative_control_fails_f1():
    flow, f = _affine_flow(times=[0.0, 1.0])
    wrong = f.scaled(1.01)
    report = check_flow_conditions(flow, wrong, eps=0.6, R_list=[4.0], delta=0.15, tol=1e-12)
    assert not report.f1_ok
    assert report.f1["sup_psi1_minus_f"] == pytest.approx(0.01 * f.sup(), rel=1e-9)


def test_flow_check_needs_endpoints():
    flow, f = _affine_flow(times=[0.0, 0.5])
    with pytest.raises(InvalidParameter):
        check_flow_conditions(flow, f, eps=0.5, R_list=[4.0], delta=0.1)


def test_modulus_ratio_closed_forms():
    assert modulus_ratio(lambda z: 3 * z, 2.0) == pytest.approx(1.0, abs=1e-14)
    # |z^2 + 0.5 conj z| on |z| = 3 ranges over [9 - 1.5, 9 + 1.5]
    assert modulus_ratio(lambda z: z ** 2 + 0.5 * np.conj(z), 3.0, m=1200) == pytest.approx(10.5 / 7.5)
    with pytest.raises(ZeroOnTrace):
        modulus_ratio(lambda z: z - 2.0, 2.0, m=64)
