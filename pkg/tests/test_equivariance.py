import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scaleinv import (
    SCALING,
    DomainError,
    DynamicalSystem,
    equivariance_residual,
    equivariance_sweep,
    independence_margin,
    invariance_io_test,
    pde_residuals,
    signals,
    translation_family,
)
from scaleinv.examples import FeedForwardParams, bistable_bundle, feedforward_bundle

FFB = feedforward_bundle()
BIB = bistable_bundle()


def _squared_input_feedforward(params=FeedForwardParams()):
    a, b, c, d = params.a, params.b, params.c, params.d

    def f(x, u):
        return np.array([-a * x[0] + b * u ** 2, c * u / (x[0] + u) - d * x[1]])

    return DynamicalSystem(2, f, lambda x: x[1], [(0.0, np.inf), (-np.inf, np.inf)])


@pytest.mark.parametrize("x, u, p", [([1.0, 0.5], 0.25, 0.7), ([3.0, 2.0], 2.0, -1.3), ([0.1, 0.0], 5.0, 2.0)])
def test_feedforward_residual_vanishes(x, u, p):
    r_f, r_h = equivariance_residual(FFB.original, SCALING, FFB.family, x, u, p)
    assert np.max(np.abs(r_f)) <= 1e-8
    assert r_h == 0.0


def test_zero_shift_gives_zero_residual():
    r_f, r_h = equivariance_residual(BIB.original, SCALING, BIB.family, [2.0, 3.0, 0.5], 1.7, 0.0)
    assert np.max(np.abs(r_f)) <= 1e-12 and r_h == 0.0


@pytest.mark.parametrize("p", [0.5, -1.0, math.log(2)])
def test_squared_input_breaks_equivariance(p):
    u, b = 0.8, FeedForwardParams().b
    r_f, _ = equivariance_residual(_squared_input_feedforward(), SCALING, FFB.family, [1.3, 0.4], u, p)
    assert r_f[0] == pytest.approx(b * (math.exp(2 * p) - math.exp(p)) * u ** 2, rel=1e-12)


def test_residual_domain_check():
    # a translation of x pushes states out of the positive orthant
    shift = translation_family([1.0, 0.0])
    with pytest.raises(DomainError):
        equivariance_residual(FFB.original, SCALING, shift, [1.0, 0.0], 1.0, -2.0)


@pytest.mark.parametrize("bundle", [FFB, BIB], ids=["feedforward", "bistable"])
def test_sweep_passes_for_examples(bundle):
    report = equivariance_sweep(bundle.original, bundle.group, bundle.family, bundle.x_box, bundle.u_box)
    assert report.passed
    assert report.max_residual <= 1e-8
    assert len(report.rows) == 100


def test_sweep_flags_broken_system_with_worst_sample():
    report = equivariance_sweep(_squared_input_feedforward(), SCALING, FFB.family, FFB.x_box, FFB.u_box)
    assert not report.passed
    assert report.worst["normalized"] == report.max_residual
    assert set(report.csv_rows()[0]) == {"x1", "x2", "u", "p", "r_f1", "r_f2", "r_h", "normalized"}


def test_sweep_is_deterministic():
    a = equivariance_sweep(FFB.original, SCALING, FFB.family, FFB.x_box, FFB.u_box, seed=3)
    b = equivariance_sweep(FFB.original, SCALING, FFB.family, FFB.x_box, FFB.u_box, seed=3)
    assert a.rows == b.rows


def test_feedforward_io_invariance():
    u = signals.sinusoid(0.25, 0.125, 1.0, domain=SCALING.domain)
    res = invariance_io_test(FFB.original, SCALING, FFB.family, [1.0, 0.5], u, math.log(2), (0.0, 20.0))
    assert res.passed and float(res) <= 1e-6


def test_bistable_io_invariance():
    res = invariance_io_test(BIB.original, SCALING, BIB.family, [5.0, 10.0, 1.0], signals.constant(1.0),
                             math.log(3), (0.0, 20.0))
    assert res.max_deviation <= 1e-6


def test_zero_shift_io_identical():
    u = signals.sinusoid(1.0, 0.5, 2.0, domain=SCALING.domain)
    assert invariance_io_test(BIB.original, SCALING, BIB.family, [1.0, 2.0, 0.3], u, 0.0,
                              (0.0, 10.0)).max_deviation == 0.0


def test_io_grid_minimum():
    with pytest.raises(ValueError):
        invariance_io_test(FFB.original, SCALING, FFB.family, [1.0, 0.5], signals.constant(1.0), 0.1,
                           (0.0, 1.0), n_grid=50)


def test_broken_system_fails_io_invariance():
    u = signals.sinusoid(0.5, 0.25, 1.0, domain=SCALING.domain)
    res = invariance_io_test(_squared_input_feedforward(), SCALING, FFB.family, [1.0, 0.5], u, math.log(2),
                             (0.0, 20.0))
    assert not res.passed


def test_pde_residuals_feedforward():
    res_z, res_p = pde_residuals(FFB.family, lambda x: x[1], lambda x: math.log(x[0]), [2.0, 3.0])
    assert abs(res_z[0]) <= 1e-9 and abs(res_p) <= 1e-9


def test_pde_residuals_wrong_candidate():
    _, res_p = pde_residuals(FFB.family, lambda x: x[1], lambda x: x[0], [2.0, 3.0])
    assert res_p == pytest.approx(1.0, abs=1e-6)


def test_independence_margin():
    good = independence_margin(lambda x: x[1], lambda x: math.log(x[0]), [2.0, 3.0])
    bad = independence_margin(lambda x: x[1], lambda x: 2 * x[1], [2.0, 3.0])
    assert good > 1e-8
    assert bad < 1e-8


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 20.0), st.floats(0.05, 20.0), st.floats(0.0, 2.0))
def test_bistable_pde_residuals_property(x1, x2, y):
    for name, (delta, _) in BIB.deltas.items():
        res_z, res_p = pde_residuals(BIB.family, lambda v: delta(v)[:-1], lambda v: delta(v)[-1], [x1, x2, y])
        assert np.max(np.abs(res_z)) <= 1e-6 and abs(res_p) <= 1e-6, name


@settings(max_examples=5, deadline=None)
@given(st.floats(0.05, 2.0), st.floats(0.0, 0.9), st.floats(0.2, 3.0), st.floats(-1.5, 1.5))
def test_equivariance_implies_io_invariance(mean, rel, omega, p):
    u = signals.sinusoid(mean, mean * rel, omega, domain=SCALING.domain)
    res = invariance_io_test(FFB.original, SCALING, FFB.family, [1.0, 0.5], u, p, (0.0, 10.0))
    assert res.max_deviation <= 1e-6
