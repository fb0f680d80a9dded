"""ODE systems ``dx/dt = f(x, u)``, ``y = h(x)`` and adaptive dense-output integration."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from ._numerics import DomainError, as_box, in_box, unbounded

DEFAULT_RTOL = 1e-8
DEFAULT_ATOL = 1e-10


class SimulationError(RuntimeError):
    """Integration failed; ``t_last`` is the last time reached."""

    def __init__(self, message, t_last):
        super().__init__(f"{message} (last reached t={t_last:.17g})")
        self.t_last = t_last


class StepSizeError(SimulationError):
    """Step size underflow: stiffness or finite-time blow-up."""


class DomainExitError(SimulationError):
    """The state crossed the boundary of the state domain."""


@dataclass(frozen=True)
class DynamicalSystem:
    """Single-input single-output system.

    Parameters
    ----------
    n : int
        State dimension.
    f : callable
        ``f(x, u) -> dx/dt``.
    h : callable
        ``h(x) -> y``.
    state_domain : sequence of (lo, hi)
        Open per-component intervals; ``None`` means unbounded.
    channels : dict
        Extra derived scalar channels ``name -> g(x, u)`` recorded by :func:`simulate`.
    """

    n: int
    f: Callable[[np.ndarray, float], np.ndarray]
    h: Callable[[np.ndarray], float]
    state_domain: Optional[Sequence] = None
    label: str = "system"
    state_names: Optional[Sequence[str]] = None
    channels: Dict[str, Callable] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("state dimension must be >= 1")
        dom = unbounded(self.n) if self.state_domain is None else self.state_domain
        lo, hi = as_box(dom, self.n)
        object.__setattr__(self, "state_domain", tuple(zip(lo.tolist(), hi.tolist())))
        names = self.state_names or [f"x{i + 1}" for i in range(self.n)]
        if len(names) != self.n:
            raise ValueError("state_names length must equal n")
        object.__setattr__(self, "state_names", tuple(names))

    def rhs(self, x, u):
        return np.asarray(self.f(np.asarray(x, dtype=float), u), dtype=float)

    def output(self, x):
        return float(self.h(np.asarray(x, dtype=float)))

    def in_domain(self, x) -> bool:
        return in_box(x, self.state_domain)


class Trajectory:
    """Solution ``xi(t, x0, u)`` on a grid, with a dense evaluator.

    Attributes
    ----------
    t : ndarray, shape (k,)
    x : ndarray, shape (k, n)
    channels : dict of name -> ndarray, shape (k,)
    """

    def __init__(self, t, x, channels, state_names, dense=None, channel_fns=None, signal=None):
        self.t = np.asarray(t, dtype=float)
        self.x = np.asarray(x, dtype=float)
        self.channels = dict(channels)
        self.state_names = tuple(state_names)
        self._dense = dense
        self._channel_fns = channel_fns or {}
        self._signal = signal

    def __len__(self):
        return self.t.size

    def __getitem__(self, name):
        if name in self.channels:
            return self.channels[name]
        if name in self.state_names:
            return self.x[:, self.state_names.index(name)]
        raise KeyError(name)

    @property
    def y(self):
        return self.channels["y"]

    def __call__(self, t):
        """Dense state at time(s) ``t``; exact grid states are returned at grid points."""
        if self._dense is None:
            raise RuntimeError("trajectory has no dense evaluator")
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty((ts.size, self.x.shape[1]))
        ascending = self.t.size < 2 or self.t[-1] > self.t[0]
        grid = self.t if ascending else self.t[::-1]
        for i, ti in enumerate(ts):
            k = int(np.searchsorted(grid, ti))
            if k < grid.size and grid[k] == ti:
                out[i] = self.x[k if ascending else self.t.size - 1 - k]
            else:
                out[i] = self._dense(ti)
        return out[0] if np.ndim(t) == 0 else out

    def resample(self, ts):
        """New trajectory on grid ``ts`` with channels recomputed from dense states."""
        ts = np.asarray(ts, dtype=float)
        xs = self(ts)
        return Trajectory(ts, xs, _eval_channels(self._channel_fns, ts, xs, self._signal),
                          self.state_names, self._dense, self._channel_fns, self._signal)

    def columns(self):
        """Ordered ``(name, series)`` pairs: ``t``, states, then channels."""
        cols = [("t", self.t)]
        cols += [(name, self.x[:, i]) for i, name in enumerate(self.state_names)]
        cols += list(self.channels.items())
        return cols


def _eval_channels(fns, ts, xs, signal):
    out = {name: np.empty(ts.size) for name in fns}
    for k, (t, x) in enumerate(zip(ts, xs)):
        u = signal(t)
        for name, fn in fns.items():
            out[name][k] = fn(x, u)
    return out


class _Dense:
    """Piecewise dense evaluator over restart segments (right-continuous)."""

    def __init__(self):
        self.lows = []
        self.sols = []

    def add(self, a, b, sol):
        k = int(np.searchsorted(self.lows, min(a, b)))
        self.lows.insert(k, min(a, b))
        self.sols.insert(k, sol)

    def __call__(self, t):
        k = int(np.searchsorted(self.lows, t, side="right")) - 1
        return self.sols[max(k, 0)](t)


def _domain_events(system):
    events = []
    for i, (lo, hi) in enumerate(system.state_domain):
        for bound, direction in ((lo, -1.0), (hi, 1.0)):
            if np.isfinite(bound):
                def ev(t, x, i=i, b=bound):
                    return x[i] - b
                ev.terminal = True
                ev.direction = direction
                events.append(ev)
    return events


def simulate(system: DynamicalSystem, x0, u, t_span, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL,
             method="DOP853", max_step=np.inf) -> Trajectory:
    """Integrate ``system`` from ``x0`` under input signal ``u`` over ``t_span``.

    The integration restarts at every input breakpoint so that discontinuities
    are step boundaries.  Channel ``y`` plus any ``system.channels`` are
    recorded on the step grid.  ``t_span`` may be decreasing (backward in time).

    Raises
    ------
    DomainError
        ``x0`` outside the state domain, or non-positive tolerances.
    DomainExitError
        The trajectory crossed the domain boundary.
    StepSizeError
        The step size underflowed (stiffness or blow-up).
    """
    if rtol <= 0 or atol <= 0:
        raise DomainError("rtol and atol must be positive")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (system.n,):
        raise ValueError(f"x0 must have shape ({system.n},), got {x0.shape}")
    if not system.in_domain(x0):
        raise DomainError(f"initial state {x0} outside state domain {system.state_domain}")

    t0, t1 = float(t_span[0]), float(t_span[1])
    lo_t, hi_t = min(t0, t1), max(t0, t1)
    cuts = u.breakpoints(lo_t, hi_t)
    if t1 < t0:
        cuts = cuts[::-1]
    knots = [t0, *cuts, t1]
    events = _domain_events(system)

    ts, xs = [np.array([t0])], [x0[None, :]]
    dense = _Dense()
    x_start = x0
    for a, b in zip(knots[:-1], knots[1:]):
        # input sampled on [lo, hi): the value at the upper breakpoint belongs
        # to the next segment (right-continuity) and must not leak in
        lo_s, hi_in = min(a, b), np.nextafter(max(a, b), -np.inf)

        def rhs(t, x, lo_s=lo_s, hi_in=hi_in):
            return system.rhs(x, u(min(max(t, lo_s), hi_in)))

        sol = solve_ivp(rhs, (a, b), x_start, method=method, rtol=rtol, atol=atol,
                        dense_output=True, events=events or None, max_step=max_step)
        if sol.status == 1:
            t_hit = next(te[0] for te in sol.t_events if te.size)
            raise DomainExitError("state left the state domain", float(t_hit))
        if sol.status != 0:
            raise StepSizeError(f"integration failed: {sol.message}", float(sol.t[-1]))
        dense.add(a, b, sol.sol)
        ts.append(sol.t[1:])
        xs.append(sol.y[:, 1:].T)
        x_start = sol.y[:, -1]

    t = np.concatenate(ts)
    x = np.concatenate(xs)
    fns = {"y": lambda xx, uu: system.output(xx), **system.channels}
    return Trajectory(t, x, _eval_channels(fns, t, x, u), system.state_names, dense, fns, u)
