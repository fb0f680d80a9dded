import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scaleinv import SCALING, TRANSLATION, infinitesimal, scaling_family, translation_family, verify_group_axioms
from scaleinv.groups import StateTransformationFamily, TransformationGroup, get_group

GRID_U = [0.1, 1.0, 10.0]
GRID_P = [-1.0, 0.0, 1.0]


@pytest.mark.parametrize("group", [SCALING, TRANSLATION], ids=["scaling", "translation"])
def test_builtin_groups_satisfy_axioms(group):
    report = verify_group_axioms(group, GRID_U, GRID_P)
    assert report.passed
    assert report.identity == 0.0
    assert report.composition <= 1e-14 * 10
    assert report.inverse <= 1e-14 * 10


def test_broken_parametrization_fails_composition():
    # u + p^2: composing p1 = p2 = 1 gives u + 2, the single step p = 2 gives u + 4
    report = verify_group_axioms(lambda p, u: u + p ** 2, [0.0, 1.0], [1.0])
    assert not report.passed
    assert report.composition == pytest.approx(2.0)


@pytest.mark.parametrize("values, params", [([], [1.0]), ([1.0], [])])
def test_empty_samples_rejected(values, params):
    with pytest.raises(ValueError):
        verify_group_axioms(SCALING, values, params)


def test_lookup_by_name():
    assert get_group("scaling") is SCALING
    assert get_group("translation") is TRANSLATION
    with pytest.raises(KeyError):
        get_group("rotation")


def test_domain_membership():
    assert SCALING.contains(0.0) and SCALING.contains(3.0)
    assert not SCALING.contains(-1.0)
    assert TRANSLATION.contains(-1e9)


@pytest.mark.parametrize("family, x, expected", [
    (scaling_family([1.0, 0.0]), [2.0, 3.0], [2.0, 0.0]),
    (translation_family([1.0]), [0.7], [1.0]),
    (scaling_family([1.0, 1.0, 0.0]), [1.0, 2.0, 3.0], [1.0, 2.0, 0.0]),
])
@pytest.mark.parametrize("closed_form", [True, False], ids=["analytic", "finite-difference"])
def test_infinitesimal_examples(family, x, expected, closed_form):
    eta = infinitesimal(family, np.array(x), closed_form=closed_form)
    np.testing.assert_allclose(eta, expected, rtol=1e-6, atol=1e-9)


def test_group_generators_match_numerics():
    for u in (0.1, 1.0, 7.0):
        assert SCALING.infinitesimal(u) == pytest.approx(u, rel=1e-6)
        assert TRANSLATION.infinitesimal(u) == pytest.approx(1.0, rel=1e-6)


def test_finite_difference_jacobian_fallback():
    fam = StateTransformationFamily(apply=lambda p, x: np.array([np.exp(p) * x[0], x[1] + p]), n=2)
    jac = fam.jacobian(0.5, np.array([2.0, 1.0]))
    np.testing.assert_allclose(jac, np.diag([np.exp(0.5), 1.0]), rtol=1e-8, atol=1e-9)


def test_custom_group_needs_additive_parametrization():
    # multiplicative parametrization u -> p u is not additive
    bad = TransformationGroup(apply=lambda p, u: p * u, domain=(0.0, np.inf), label="bad")
    assert not verify_group_axioms(bad, GRID_U, [0.5, 2.0]).passed


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(-5, 5))
def test_inverse_round_trip(u, p):
    for group in (SCALING, TRANSLATION):
        assert group.apply(p, group.apply(-p, u)) == pytest.approx(u, rel=1e-10)
        assert group.inverse(p, group(p, u)) == pytest.approx(u, rel=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.01, 100.0), min_size=3, max_size=3), st.floats(-3, 3), st.floats(-3, 3))
def test_family_composition(x, p1, p2):
    fam = scaling_family([1.0, 2.0, 0.0])
    x = np.array(x)
    np.testing.assert_allclose(fam(p2, fam(p1, x)), fam(p1 + p2, x), rtol=1e-12)
    np.testing.assert_array_equal(fam(0.0, x), x)
