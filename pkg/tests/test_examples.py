import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scaleinv import (
    SCALING,
    as_flat_system,
    equivariance_sweep,
    find_constant_transmissible,
    invariance_io_test,
    pde_residuals,
    rectify_group_action,
    signals,
    simulate,
    simulate_normal_form,
)
from scaleinv._numerics import sample_box
from scaleinv.examples import (
    BistableParams,
    CircadianParams,
    FeedForwardParams,
    bistable_bundle,
    bistable_nullclines,
    circadian_feedback_input,
    circadian_normal_form,
    circadian_state_names,
    circadian_transmissible_input,
    day_night_input,
    feedforward_bundle,
    get_bundle,
)

FFB = feedforward_bundle()
BIB = bistable_bundle()
CIRC = circadian_normal_form()


def _circadian_oracle(z, u_hat, p=CircadianParams()):
    # hand-transcribed right-hand side, one line per state, for N = 4
    zP1, zP2, zP3, zP4, zCm, zC1, zC2, zC3, zC4 = z
    n, a, r = p.n, p.alpha, p.n / (p.n + 1)
    om = p.v_P / (zP4 ** n * zC4 ** n) * zC4 ** a * u_hat - p.k_Dm
    return np.array([
        p.k_TL - zP1 * (p.k_p + p.k_DP + om),
        zP1 - zP2 * (p.k_p + p.k_DP + om),
        zP2 - zP3 * (p.k_p + p.k_DP + om),
        p.k_p * zP3 - zP4 * (p.k_DP + om),
        p.v_C / (zC4 ** n * zP4 ** n) - zCm * (p.k_Dm - r * om),
        p.k_TL * zCm - zC1 * (p.k_p + p.k_DC - r * om),
        p.k_p * zC1 - zC2 * (p.k_p + p.k_DC - r * om),
        p.k_p * zC2 - zC3 * (p.k_p + p.k_DC - r * om),
        p.k_p * zC3 - zC4 * (p.k_DC - r * om),
        (2 * n + 1 + a * n) / (n + 1) * om + a * (p.k_p * zC3 / zC4 - p.k_DC),
    ])


@pytest.mark.parametrize("cls, field", [(FeedForwardParams, "a"), (BistableParams, "ky"), (CircadianParams, "k_p")])
def test_rates_must_be_positive(cls, field):
    with pytest.raises(ValueError):
        cls(**{field: 0.0})


@pytest.mark.parametrize("N", [1, 2.5])
def test_chain_length_validated(N):
    with pytest.raises(ValueError):
        CircadianParams(N=N)


def test_default_parameters():
    assert FeedForwardParams() == FeedForwardParams(a=1, b=4, c=10, d=4)
    assert BistableParams() == BistableParams(v1=1, v2=0.1, vy=3.5, k1=0.15, k2=0.1, ky=2)
    p = CircadianParams()
    assert (p.N, p.k_TL, p.k_Dm, p.v_C, p.k_p, p.n, p.alpha) == (4, 0.25, 0.5, 0.01, 0.5, 2, -1.5)


def test_feedforward_original_equations():
    x, u = np.array([2.0, 0.3]), 0.7
    expected = [-1.0 * 2.0 + 4.0 * 0.7, 10.0 * 0.7 / (2.0 + 0.7) - 4.0 * 0.3]
    np.testing.assert_allclose(FFB.original.rhs(x, u), expected, rtol=1e-15)
    assert FFB.original.output(x) == 0.3


def test_bistable_original_equations():
    x, u = np.array([2.0, 4.0, 0.5]), 1.5
    expected = [1.5 - 0.15 * 2 - 0.5 * 2, 0.1 * 1.5 - 0.1 * 4, 3.5 / (1 + 0.25) - 2 * 0.5]
    np.testing.assert_allclose(BIB.original.rhs(x, u), expected, rtol=1e-15)


def test_circadian_dimensions():
    assert CIRC.m == 9
    assert circadian_state_names(4)[4] == "zCm"
    assert as_flat_system(CIRC)[0].n == 10


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.05, 5.0), min_size=9, max_size=9), st.floats(0.01, 10.0))
def test_circadian_matches_transcribed_rhs(z, u):
    z = np.array(z)
    np.testing.assert_allclose(CIRC.variable_part(z, u), _circadian_oracle(z, u), rtol=1e-12, atol=1e-12)


def test_per_chain_kp_flag():
    z = np.linspace(0.3, 1.1, 9)
    base = circadian_normal_form(CircadianParams()).f_z(z, 0.5)
    alt = circadian_normal_form(CircadianParams(per_chain_kp=True)).f_z(z, 0.5)
    changed = np.flatnonzero(base != alt)
    assert changed.tolist() == [1, 2]
    assert alt[1] - base[1] == pytest.approx((0.5 - 1.0) * z[0])


def test_circadian_n2_collapses_generic_lines():
    nf = circadian_normal_form(CircadianParams(N=2))
    assert nf.m == 5
    assert np.all(np.isfinite(nf.variable_part(np.full(5, 0.7), 0.4)))


def test_feedback_input_zeroes_error():
    z = np.linspace(0.2, 1.4, 9)
    u = circadian_feedback_input(CircadianParams(), z)
    assert abs(CIRC.h_e(z, u)) <= 1e-12


@pytest.mark.parametrize("bundle", [FFB, BIB], ids=["feedforward", "bistable"])
def test_bundle_equivariance(bundle):
    assert equivariance_sweep(bundle.original, SCALING, bundle.family, bundle.x_box, bundle.u_box).max_residual <= 1e-8


@pytest.mark.parametrize("bundle", [FFB, BIB], ids=["feedforward", "bistable"])
def test_bundle_pde_residuals(bundle):
    rng = np.random.default_rng(0)
    for name, (delta, _) in bundle.deltas.items():
        for x in sample_box(bundle.x_box, 100, rng):
            res_z, res_p = pde_residuals(bundle.family, lambda v: delta(v)[:-1], lambda v: delta(v)[-1], x)
            assert np.max(np.abs(res_z)) <= 1e-6 and abs(res_p) <= 1e-6


@pytest.mark.parametrize("bundle", [FFB, BIB], ids=["feedforward", "bistable"])
def test_default_cross_sections_reproduce_delta(bundle):
    rng = np.random.default_rng(4)
    for x in sample_box(bundle.x_box, 5, rng):
        z, p_hat = rectify_group_action(bundle.family, bundle.cross_section, x)
        np.testing.assert_allclose(np.append(z, p_hat), bundle.delta(x), atol=1e-6)


def test_feedforward_transmissible_at_a_over_b():
    tis = find_constant_transmissible(FFB.nf, FFB.transmissible_box["nf"])
    assert [round(t.u_value, 12) for t in tis] == [0.25]


def test_nullclines_intersect_three_times():
    dz1, dz2 = bistable_nullclines(BistableParams())
    z1 = np.linspace(0.05, 8.0, 4001)
    diff = dz1(z1) - dz2(z1)
    assert np.count_nonzero(np.sign(diff[1:]) != np.sign(diff[:-1])) == 3


def test_second_form_nullclines_require_input():
    with pytest.raises(ValueError):
        bistable_nullclines(BistableParams(), form="nf2")
    with pytest.raises(ValueError):
        bistable_nullclines(BistableParams(), form="nf3")


def test_feedforward_scaled_input_reproduction():
    # step input, initial states on the respective equilibria
    u = signals.piecewise([(0.0, signals.constant(0.5)), (5.0, signals.constant(1.0))], SCALING.domain)
    res = invariance_io_test(FFB.original, SCALING, FFB.family, [2.0, 0.5], u, math.log(2), (0.0, 20.0))
    assert res.max_deviation <= 1e-6


@pytest.mark.parametrize("nf_name", ["nf", "nf2"])
def test_bistable_shift_identity(nf_name):
    nf = BIB.normal_forms[nf_name]
    u = signals.sinusoid(1.0, 0.5, 0.4, domain=SCALING.domain)
    p = 0.8
    a = simulate_normal_form(nf, [1.0, 0.5], 0.0, u, (0.0, 100.0))
    b = simulate_normal_form(nf, [1.0, 0.5], p, signals.transform_signal(SCALING, p, u), (0.0, 100.0))
    grid = np.linspace(0, 100, 1001)
    xa, xb = a(grid), b(grid)
    assert np.max(np.abs(xa[:, :2] - xb[:, :2])) <= 1e-6
    assert np.max(np.abs(xb[:, 2] - xa[:, 2] - p)) <= 1e-6


def test_circadian_shift_identity():
    z0 = np.linspace(0.3, 0.9, 9)
    u = day_night_input()
    a = simulate_normal_form(CIRC, z0, 0.0, u, (0.0, 100.0))
    b = simulate_normal_form(CIRC, z0, math.log(2), signals.transform_signal(SCALING, math.log(2), u), (0.0, 100.0))
    grid = np.linspace(0, 100, 401)
    xa, xb = a(grid), b(grid)
    assert np.max(np.abs(xa[:, :9] - xb[:, :9])) <= 1e-6
    assert np.max(np.abs(xb[:, 9] - xa[:, 9] - math.log(2))) <= 1e-6


def test_periodic_transmissible_input():
    pti = circadian_transmissible_input()
    assert 20.0 < pti.period < 28.0
    assert np.all(pti.values > 0)
    # replaying the tabulated input from the cycle keeps p_hat near zero
    tr = simulate_normal_form(CIRC, pti.z0, 0.0, pti.signal, (0.0, 3 * pti.period))
    assert np.max(np.abs(tr["p_hat"])) <= 1e-6
    np.testing.assert_allclose(tr(3 * pti.period)[:9], pti.z0, atol=1e-5)


def test_day_night_profile():
    u = day_night_input()
    assert u(6.0) == pytest.approx(0.6)
    assert u(18.0) == pytest.approx(0.0, abs=1e-15)
    assert u(30.0) == pytest.approx(u(6.0))


def test_get_bundle_overrides():
    b = get_bundle("feedforward", a=2.0)
    assert find_constant_transmissible(b.nf, b.transmissible_box["nf"])[0].u_value == pytest.approx(0.5)
    with pytest.raises(KeyError):
        get_bundle("oscillator")


def test_feedforward_relaxes_to_equilibrium():
    tr = simulate(FFB.original, [1.0, 0.5], signals.constant(0.5), (0.0, 40.0))
    np.testing.assert_allclose(tr.x[-1], [2.0, 0.5], atol=1e-8)
