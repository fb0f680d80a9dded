import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from scaleinv import SCALING, NormalFormSystem, basin_sample, classify_stability, find_constant_transmissible, signals
from scaleinv import simulate_normal_form
from scaleinv.examples import BistableParams, FeedForwardParams, bistable_bundle, feedforward_bundle
from scaleinv.transmissible import TransmissibleInput

FFB = feedforward_bundle()
BIB = bistable_bundle()
NF7, NF8 = BIB.normal_forms["nf"], BIB.normal_forms["nf2"]


def _nf8_roots_by_scan(p=BistableParams()):
    # eliminate u = (k1 + z2) / v1 and z2 = vy / (ky (1 + z1^2)); for z1 > 0 the
    # first equation reduces to (v1 - v2 z1)(k1 + z2) / v1 = k1 - k2 + z2
    def g(z1):
        z2 = p.vy / (p.ky * (1 + z1 ** 2))
        return (p.v1 - p.v2 * z1) * (p.k1 + z2) / p.v1 - (p.k1 - p.k2 + z2)

    grid = np.linspace(0.01, 9.99, 20001)
    vals = g(grid)
    return [brentq(g, a, b, xtol=1e-15) for a, b, fa, fb in zip(grid, grid[1:], vals, vals[1:]) if fa * fb < 0]


def _cubic_roots():
    # same condition for the default parameters, multiplied out
    r = np.roots([0.15, -1.0, 1.9, -1.0])
    return np.sort(r[np.isreal(r)].real)


def test_oracles_agree():
    np.testing.assert_allclose(_nf8_roots_by_scan(), _cubic_roots(), rtol=1e-12)
    np.testing.assert_allclose(_cubic_roots(), [0.88036702, 2.0, 3.78629965], atol=1e-8)


def test_feedforward_single_stable_root():
    tis = find_constant_transmissible(FFB.nf, FFB.transmissible_box["nf"])
    assert len(tis) == 1
    ti = tis[0]
    p = FeedForwardParams()
    assert ti.u_value == pytest.approx(p.a / p.b, abs=1e-10)
    assert ti.z_star[0] == pytest.approx(0.5, abs=1e-10)
    assert ti.classification == "stable"
    assert ti.residual <= 1e-10 and not ti.degenerate


def test_feedforward_eigenvalues_match_hand_computation():
    # closed loop over (z, p_hat) with u = u_hat e^{p_hat}: d u_hat / d p_hat = -u_hat,
    # Jacobian [[-d, -c u/(1+u)^2], [0, -b u]] is upper triangular
    p, u = FeedForwardParams(), 0.25
    ti = find_constant_transmissible(FFB.nf, FFB.transmissible_box["nf"])[0]
    np.testing.assert_allclose(np.sort(ti.eigenvalues.real), np.sort([-p.d, -p.b * u]), rtol=1e-6)
    np.testing.assert_allclose(ti.eigenvalues.imag, 0.0, atol=1e-9)


def test_nf7_single_transmissible_input():
    tis = find_constant_transmissible(NF7, BIB.transmissible_box["nf"])
    p = BistableParams()
    assert len(tis) == 1
    assert tis[0].u_value == pytest.approx(p.k2 / p.v2, abs=1e-10)
    assert tis[0].classification == "stable"
    # the variable part is bistable at this input: three equilibria share it
    z1s = sorted(z[0] for z in tis[0].equilibria)
    np.testing.assert_allclose(z1s, _cubic_roots(), atol=1e-8)


def test_nf8_three_roots_two_stable():
    tis = find_constant_transmissible(NF8, BIB.transmissible_box["nf2"])
    assert len(tis) == 3
    z1 = np.sort([ti.z_star[0] for ti in tis])
    np.testing.assert_allclose(z1, _cubic_roots(), atol=1e-8)
    by_z1 = {round(ti.z_star[0], 6): ti for ti in tis}
    for root in _cubic_roots():
        ti = by_z1[round(root, 6)]
        assert ti.u_value == pytest.approx(1.0 / root, rel=1e-8)
        assert ti.residual <= 1e-10
    labels = [by_z1[round(r, 6)].classification for r in _cubic_roots()]
    assert labels == ["stable", "unstable", "stable"]


def test_roots_zero_vector_field():
    for nf, box in ((NF7, BIB.transmissible_box["nf"]), (NF8, BIB.transmissible_box["nf2"]),
                    (FFB.nf, FFB.transmissible_box["nf"])):
        for ti in find_constant_transmissible(nf, box):
            assert np.max(np.abs(nf.variable_part(ti.z_star, ti.u_value))) <= 1e-10


def test_no_roots_gives_empty_list():
    # the adaptation error never vanishes
    nf = NormalFormSystem(SCALING, 1, lambda z, u: np.array([u - z[0]]), lambda z, u: 1.0 + u, lambda z: z[0])
    assert find_constant_transmissible(nf, [(0.1, 3.0), (0.1, 3.0)], n_starts=16) == []


def test_deterministic_multistart():
    a = find_constant_transmissible(NF8, BIB.transmissible_box["nf2"])
    b = find_constant_transmissible(NF8, BIB.transmissible_box["nf2"])
    assert [t.u_value for t in a] == [t.u_value for t in b]


def test_classify_marginal():
    # z' = 0 direction makes the closed loop marginal
    nf = NormalFormSystem(SCALING, 1, lambda z, u: np.array([0.0 * z[0]]), lambda z, u: u - 1.0, lambda z: z[0])
    cand = classify_stability(nf, TransmissibleInput(1.0, np.array([0.3])))
    assert cand.classification == "marginal"


def test_basin_feedforward_global():
    ti = find_constant_transmissible(FFB.nf, FFB.transmissible_box["nf"])[0]
    res = basin_sample(FFB.nf, ti, [(0.1, 2.0), (-1.0, 1.0)], n_samples=16, horizon=60.0)
    assert res.fraction == 1.0


def test_basin_bistable_split():
    tis = {ti.classification + str(round(ti.z_star[0])): ti
           for ti in find_constant_transmissible(NF8, BIB.transmissible_box["nf2"])}
    region = [(0.3, 5.0), (0.0, 1.5), (-0.5, 0.5)]
    low = basin_sample(NF8, tis["stable1"], region, n_samples=16, horizon=400.0)
    high = basin_sample(NF8, tis["stable4"], region, n_samples=16, horizon=400.0)
    assert 0.0 < low.fraction < 1.0
    assert 0.0 < high.fraction < 1.0


def test_basin_needs_samples():
    ti = TransmissibleInput(0.25, np.array([0.5]))
    with pytest.raises(ValueError):
        basin_sample(FFB.nf, ti, [(0.1, 2.0), (-1.0, 1.0)], n_samples=0)


@settings(max_examples=6, deadline=None)
@given(st.floats(-2.0, 2.0), st.floats(-0.2, 0.2))
def test_estimator_consistency(p, dz):
    # stable transmissible input pi_p(u_TI): p_hat converges to p
    ti = find_constant_transmissible(FFB.nf, FFB.transmissible_box["nf"])[0]
    u = signals.constant(SCALING.apply(p, ti.u_value), SCALING.domain)
    tr = simulate_normal_form(FFB.nf, ti.z_star + dz, 0.0, u, (0.0, 60.0))
    assert tr["p_hat"][-1] == pytest.approx(p, abs=1e-4)


def test_gauge_changes_transmissible_count():
    n7 = len(find_constant_transmissible(NF7, BIB.transmissible_box["nf"]))
    n8 = len(find_constant_transmissible(NF8, BIB.transmissible_box["nf2"]))
    assert (n7, n8) == (1, 3)
