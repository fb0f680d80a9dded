"""Admissible input trajectories: piecewise generators and pointwise transforms.

Generators are evaluated at absolute time.  A signal is a sorted list of
``(t_start, generator)`` segments; at a boundary the later segment wins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from ._numerics import DomainError
from .groups import TransformationGroup


@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, t):
        return self.value

    def breakpoints(self, t0, t1):
        return ()


@dataclass(frozen=True)
class Sinusoid:
    """``offset + amplitude * sin(omega * t + phase)``."""

    offset: float = 0.0
    amplitude: float = 1.0
    omega: float = 1.0
    phase: float = 0.0

    def __call__(self, t):
        return self.offset + self.amplitude * np.sin(self.omega * t + self.phase)

    def breakpoints(self, t0, t1):
        return ()


@dataclass(frozen=True)
class Ramp:
    offset: float = 0.0
    slope: float = 1.0

    def __call__(self, t):
        return self.offset + self.slope * t

    def breakpoints(self, t0, t1):
        return ()


@dataclass(frozen=True)
class Table:
    """Sampled table with ``interpolation`` ``"linear"``, ``"previous"`` (zero-order hold)
    or ``"cubic"``.

    Outside the sampled range the first/last value is held, unless ``period``
    is given: then time is wrapped into ``[times[0], times[0] + period)`` and a
    cubic table uses a periodic spline (first and last value must agree).
    """

    times: Tuple[float, ...]
    values: Tuple[float, ...]
    interpolation: str = "linear"
    period: Optional[float] = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.size == 0 or t.size != len(self.values):
            raise ValueError("table needs matching, non-empty times and values")
        if np.any(np.diff(t) <= 0):
            raise ValueError("table times must be strictly increasing")
        if self.interpolation not in ("linear", "previous", "cubic"):
            raise ValueError(f"unknown interpolation {self.interpolation!r}")
        if self.period is not None and not self.period >= t[-1] - t[0] > 0:
            raise ValueError("period must cover the sampled range")
        object.__setattr__(self, "times", tuple(float(v) for v in self.times))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.interpolation == "cubic":
            periodic = self.period is not None
            if periodic and not np.isclose(t[-1] - t[0], self.period):
                raise ValueError("periodic cubic table must span exactly one period")
            spline = CubicSpline(t, self.values, bc_type="periodic" if periodic else "not-a-knot")
            object.__setattr__(self, "_spline", spline)

    def _wrap(self, t):
        if self.period is None:
            return min(max(t, self.times[0]), self.times[-1])
        return self.times[0] + (t - self.times[0]) % self.period

    def __call__(self, t):
        t = self._wrap(t)
        if self.interpolation == "cubic":
            return float(self._spline(t))
        times = np.asarray(self.times)
        values = np.asarray(self.values)
        if self.interpolation == "linear":
            return float(np.interp(t, times, values))
        k = int(np.searchsorted(times, t, side="right")) - 1
        return float(values[max(k, 0)])

    def breakpoints(self, t0, t1):
        # kinks (linear) and jumps (previous) cost integrator order; cubic is C2
        if self.interpolation == "cubic":
            return ()
        if self.period is None:
            return tuple(s for s in self.times if t0 < s < t1)
        base = np.asarray(self.times[:-1]) if self.times[-1] - self.times[0] == self.period \
            else np.asarray(self.times)
        k0 = int(np.floor((t0 - self.times[0]) / self.period))
        k1 = int(np.ceil((t1 - self.times[0]) / self.period))
        pts = (base[None, :] + self.period * np.arange(k0, k1 + 1)[:, None]).ravel()
        return tuple(float(s) for s in pts if t0 < s < t1)


@dataclass(frozen=True)
class Transformed:
    """Pointwise ``pi_p(inner(t))``."""

    group: TransformationGroup
    p: float
    inner: "InputSignal"

    def __call__(self, t):
        return self.group.apply(self.p, self.inner(t))

    def breakpoints(self, t0, t1):
        return self.inner.breakpoints(t0, t1)


@dataclass(frozen=True)
class InputSignal:
    """Piecewise-defined input trajectory ``u(t)``, ``t >= 0``.

    Parameters
    ----------
    segments : sequence of (t_start, generator)
        Start times strictly increasing; the first must be 0.
    domain : (lo, hi)
        Admissible input values; evaluation outside raises :class:`DomainError`.
    """

    segments: Tuple[Tuple[float, object], ...]
    domain: Tuple[float, float] = (-np.inf, np.inf)

    def __post_init__(self):
        segs = tuple((float(t), g) for t, g in self.segments)
        if not segs:
            raise ValueError("signal needs at least one segment")
        starts = np.array([t for t, _ in segs])
        if starts[0] != 0.0:
            raise ValueError("first segment must start at t = 0")
        if np.any(np.diff(starts) <= 0):
            raise ValueError("segment start times must be strictly increasing")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "domain", (float(self.domain[0]), float(self.domain[1])))

    def _generator(self, t):
        starts = [s for s, _ in self.segments]
        k = int(np.searchsorted(starts, t, side="right")) - 1
        return self.segments[k][1]

    def __call__(self, t):
        if t < 0:
            raise DomainError(f"input signal evaluated at negative time t={t}")
        value = float(self._generator(t)(t))
        lo, hi = self.domain
        if not (lo <= value <= hi):
            raise DomainError(f"input value {value} at t={t} outside domain [{lo}, {hi}]")
        return value

    def values(self, ts):
        return np.array([self(t) for t in np.atleast_1d(ts)])

    def breakpoints(self, t0, t1):
        """Sorted discontinuity (or kink) times strictly inside ``(t0, t1)``."""
        pts = {s for s, _ in self.segments if t0 < s < t1}
        starts = [s for s, _ in self.segments] + [np.inf]
        for k, (s, g) in enumerate(self.segments):
            lo, hi = max(s, t0), min(starts[k + 1], t1)
            if lo < hi:
                pts.update(g.breakpoints(lo, hi))
        return sorted(pts)


def constant(value, domain=(-np.inf, np.inf)) -> InputSignal:
    return InputSignal(((0.0, Constant(float(value))),), domain)


def sinusoid(offset=0.0, amplitude=1.0, omega=1.0, phase=0.0, domain=(-np.inf, np.inf)) -> InputSignal:
    return InputSignal(((0.0, Sinusoid(offset, amplitude, omega, phase)),), domain)


def ramp(offset=0.0, slope=1.0, domain=(-np.inf, np.inf)) -> InputSignal:
    return InputSignal(((0.0, Ramp(offset, slope)),), domain)


def table(times: Sequence[float], values: Sequence[float], interpolation="linear", period=None,
          domain=(-np.inf, np.inf)) -> InputSignal:
    return InputSignal(((0.0, Table(tuple(times), tuple(values), interpolation, period)),), domain)


def piecewise(segments, domain=(-np.inf, np.inf)) -> InputSignal:
    """Build a signal from ``(t_start, generator_or_signal)`` pairs.

    Single-segment signals passed as generators are unwrapped to their generator.
    """
    segs = []
    for t, g in segments:
        if isinstance(g, InputSignal) and len(g.segments) == 1:
            g = g.segments[0][1]
        segs.append((t, g))
    return InputSignal(tuple(segs), domain)


def transform_signal(group: TransformationGroup, p: float, signal: InputSignal) -> InputSignal:
    """Pointwise transformed signal ``t -> pi_p(signal(t))``.

    Composition is not collapsed: transforming twice nests two wrappers, which
    evaluate identically to a single wrapper with the summed parameter.
    """
    return InputSignal(((0.0, Transformed(group, float(p), signal)),), group.domain)
