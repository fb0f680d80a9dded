import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scaleinv import SCALING, TRANSLATION, DomainError
from scaleinv import signals
from scaleinv.signals import InputSignal, Sinusoid, Table, transform_signal


def test_constant_evaluates_everywhere():
    assert signals.constant(0.25)(7.3) == 0.25


def test_ramp():
    assert signals.ramp(offset=1.0, slope=2.0)(3.0) == 7.0


def test_linear_table_midpoint():
    assert signals.table([0.0, 1.0], [0.0, 2.0])(0.5) == pytest.approx(1.0)


def test_table_holds_end_values():
    sig = signals.table([1.0, 2.0], [3.0, 5.0])
    assert sig(0.0) == 3.0
    assert sig(100.0) == 5.0


def test_previous_table_is_right_continuous():
    sig = signals.table([0.0, 1.0, 2.0], [1.0, 2.0, 3.0], interpolation="previous")
    assert sig(0.999) == 1.0
    assert sig(1.0) == 2.0
    assert sig.breakpoints(0.0, 5.0) == [1.0, 2.0]


def test_periodic_cubic_table_wraps():
    times = np.linspace(0.0, 2 * np.pi, 65)
    sig = signals.table(times, np.sin(times) + 2.0, interpolation="cubic", period=2 * np.pi)
    for t in (0.3, 5.0, 17.0, 40.2):
        assert sig(t) == pytest.approx(np.sin(t) + 2.0, abs=1e-5)
    assert sig.breakpoints(0.0, 100.0) == []


def test_periodic_linear_table_repeats_knots():
    sig = signals.table([0.0, 1.0, 2.0], [0.0, 1.0, 0.0], period=2.0)
    assert sig(3.0) == pytest.approx(1.0)
    assert sig.breakpoints(0.0, 4.5) == [1.0, 2.0, 3.0, 4.0]


@pytest.mark.parametrize("kwargs", [
    dict(times=[0.0, 0.0], values=[1.0, 2.0]),
    dict(times=[], values=[]),
    dict(times=[0.0, 1.0], values=[1.0]),
    dict(times=[0.0, 1.0], values=[1.0, 2.0], interpolation="spline"),
])
def test_bad_tables_rejected(kwargs):
    with pytest.raises(ValueError):
        Table(tuple(kwargs.pop("times")), tuple(kwargs.pop("values")), **kwargs)


def test_later_segment_wins_at_boundary():
    sig = signals.piecewise([(0.0, signals.constant(1.0)), (2.0, signals.constant(5.0))])
    assert sig(1.999999) == 1.0
    assert sig(2.0) == 5.0
    assert sig.breakpoints(0.0, 10.0) == [2.0]
    assert sig.breakpoints(2.0, 10.0) == []


def test_negative_time_is_a_domain_error():
    with pytest.raises(DomainError):
        signals.constant(1.0)(-0.1)


def test_value_outside_domain_raises():
    sig = signals.sinusoid(0.0, 1.0, domain=(0.0, np.inf))
    assert sig(0.0) == 0.0
    with pytest.raises(DomainError):
        sig(-np.pi / 2 + 2 * np.pi)


@pytest.mark.parametrize("segments", [
    [(0.5, Sinusoid())],
    [(0.0, Sinusoid()), (2.0, Sinusoid()), (1.0, Sinusoid())],
    [],
])
def test_segment_order_enforced(segments):
    with pytest.raises(ValueError):
        InputSignal(tuple(segments))


def test_scaling_transform_doubles():
    sig = transform_signal(SCALING, math.log(2), signals.constant(0.25))
    assert sig(3.0) == pytest.approx(0.5, rel=1e-15)


def test_translation_transform_shifts_sinusoid():
    sig = transform_signal(TRANSLATION, 1.0, signals.sinusoid())
    ts = np.linspace(0, 10, 17)
    np.testing.assert_allclose(sig.values(ts), np.sin(ts) + 1.0, rtol=0, atol=1e-15)


def test_nested_transforms_compose_additively():
    one = signals.constant(1.0, SCALING.domain)
    nested = transform_signal(SCALING, math.log(3), transform_signal(SCALING, math.log(2), one))
    single = transform_signal(SCALING, math.log(2) + math.log(3), one)
    assert nested(1.0) == pytest.approx(6.0, rel=1e-14)
    assert nested(1.0) == pytest.approx(single(1.0), rel=1e-14)


def test_transformed_value_leaving_domain_raises():
    sig = transform_signal(TRANSLATION, -2.0, signals.constant(1.0))
    bounded = InputSignal(sig.segments, (0.0, np.inf))
    with pytest.raises(DomainError):
        bounded(0.0)


def test_transform_keeps_breakpoints():
    base = signals.table([0.0, 1.0, 2.0], [1.0, 2.0, 1.0])
    assert transform_signal(SCALING, 0.3, base).breakpoints(0.0, 3.0) == [1.0, 2.0]


_signal_params = st.tuples(
    st.floats(0.5, 3.0), st.floats(0.0, 0.4), st.floats(0.1, 5.0), st.floats(-3.0, 3.0),
)


@settings(max_examples=60, deadline=None)
@given(_signal_params, st.floats(-3.0, 3.0), st.lists(st.floats(0.0, 100.0), min_size=1, max_size=8))
def test_identity_transform(params, _, ts):
    offset, rel, omega, phase = params
    sig = signals.sinusoid(offset, offset * rel, omega, phase, SCALING.domain)
    for group in (SCALING, TRANSLATION):
        same = transform_signal(group, 0.0, sig)
        for t in ts:
            assert same(t) == sig(t)


@settings(max_examples=60, deadline=None)
@given(_signal_params, st.floats(-3.0, 3.0), st.floats(-3.0, 3.0), st.lists(st.floats(0.0, 100.0), min_size=1))
def test_composition_property(params, p1, p2, ts):
    offset, rel, omega, phase = params
    sig = signals.sinusoid(offset, offset * rel, omega, phase, SCALING.domain)
    for group in (SCALING, TRANSLATION):
        nested = transform_signal(group, p2, transform_signal(group, p1, sig))
        single = transform_signal(group, p1 + p2, sig)
        for t in ts:
            assert nested(t) == pytest.approx(single(t), rel=1e-12, abs=1e-12)
