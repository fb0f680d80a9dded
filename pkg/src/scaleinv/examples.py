"""Three scale-invariant example systems: feed-forward loop, bistable switch, circadian core.

Defaults are the published figure parameters.  Original-coordinate ODEs are
provided for the feed-forward and bistable systems; the circadian model is
available in normal form only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .dynamics import DynamicalSystem
from .groups import SCALING, StateTransformationFamily, TransformationGroup, scaling_family
from .normalform import CrossSection, NormalFormSystem
from . import signals


@dataclass(frozen=True)
class FeedForwardParams:
    a: float = 1.0
    b: float = 4.0
    c: float = 10.0
    d: float = 4.0

    def __post_init__(self):
        _check_positive(self)


@dataclass(frozen=True)
class BistableParams:
    v1: float = 1.0
    v2: float = 0.1
    vy: float = 3.5
    k1: float = 0.15
    k2: float = 0.1
    ky: float = 2.0

    def __post_init__(self):
        _check_positive(self)


@dataclass(frozen=True)
class CircadianParams:
    """Rates in 1/h.  ``alpha`` is the gauge exponent, ``per_chain_kp`` multiplies
    the generic Per chain inflow by ``k_p`` (off by default: unit inflow coefficient)."""

    N: int = 4
    k_TL: float = 0.25
    k_DC: float = 0.25
    k_DP: float = 0.25
    k_Dm: float = 0.5
    v_C: float = 0.01
    v_P: float = 0.01
    k_p: float = 0.5
    n: float = 2.0
    alpha: float = -1.5
    per_chain_kp: bool = False

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError("chain length N must be an integer >= 2")
        for name in ("k_TL", "k_DC", "k_DP", "k_Dm", "v_C", "v_P", "k_p", "n"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


def _check_positive(params):
    for name, value in vars(params).items():
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value}")


@dataclass
class Bundle:
    """An example system with its symmetry, rectifying map and normal form(s).

    ``delta`` maps original states to ``(z, p_hat)``; ``normal_forms`` holds
    one or more named normal forms (``"nf"`` is the one ``delta`` produces).
    Sampling boxes are the defaults used by checks and the CLI.
    """

    name: str
    original: Optional[DynamicalSystem]
    group: TransformationGroup
    family: Optional[StateTransformationFamily]
    delta: Optional[Callable]
    delta_inverse: Optional[Callable]
    normal_forms: dict
    params: object
    x_box: Optional[list] = None
    u_box: tuple = (0.05, 5.0)
    z_box: Optional[list] = None
    transmissible_box: Optional[dict] = None
    cross_section: Optional[CrossSection] = None
    deltas: dict = field(default_factory=dict)
    delta_jacobians: dict = field(default_factory=dict)

    @property
    def nf(self) -> NormalFormSystem:
        return self.normal_forms["nf"]


def feedforward_bundle(params: FeedForwardParams = FeedForwardParams()) -> Bundle:
    """Incoherent feed-forward loop, output ``y``, state ``(x, y)`` with ``x > 0``."""
    a, b, c, d = params.a, params.b, params.c, params.d

    def f(x, u):
        return np.array([-a * x[0] + b * u, c * u / (x[0] + u) - d * x[1]])

    original = DynamicalSystem(2, f, lambda x: x[1], [(0.0, np.inf), (-np.inf, np.inf)],
                               label="feed-forward", state_names=("x", "y"))

    def f_z(z, u_hat):
        return np.array([c * u_hat / (1.0 + u_hat) - d * z[0]])

    nf = NormalFormSystem(SCALING, 1, f_z, lambda z, u_hat: -a + b * u_hat, lambda z: z[0],
                          label="feed-forward normal form", z_names=("z",))

    def delta(x):
        return np.array([x[1], np.log(x[0])])

    def delta_inverse(w):
        return np.array([np.exp(w[1]), w[0]])

    def delta_jac(x):
        return np.array([[0.0, 1.0], [1.0 / x[0], 0.0]])

    return Bundle(
        name="feedforward", original=original, group=SCALING, family=scaling_family([1.0, 0.0]),
        delta=delta, delta_inverse=delta_inverse, normal_forms={"nf": nf}, params=params,
        x_box=[(0.05, 20.0), (0.0, 3.0)], u_box=(0.05, 5.0), z_box=[(0.0, 3.0)],
        transmissible_box={"nf": [(0.01, 3.0), (0.01, 5.0)]},
        cross_section=CrossSection(anchor=lambda x: x[0] - 1.0, chart=lambda x: np.array([x[1]])),
        deltas={"nf": (delta, delta_inverse)}, delta_jacobians={"nf": delta_jac},
    )


def bistable_nullclines(params: BistableParams, u_hat=None, form="nf"):
    """Closed-form nullclines of the bistable variable part in the ``(z1, z2)`` plane.

    Returns ``(z2_of_z1_for_dz1, z2_of_z1_for_dz2)``.  ``form`` selects the
    normal form (``"nf"`` or ``"nf2"``) whose ``dz1 = 0`` branch is returned;
    ``u_hat`` defaults to ``k2 / v2`` for ``"nf"`` and is required for ``"nf2"``.
    """
    p = params
    if form not in ("nf", "nf2"):
        raise ValueError(f"unknown normal form {form!r}")
    if u_hat is None:
        if form == "nf2":
            raise ValueError("u_hat is required for the second normal form")
        u_hat = p.k2 / p.v2

    def dz1_zero(z1):
        if form == "nf":
            return (p.v1 - p.v2 * z1) * u_hat / z1 + p.k2 - p.k1
        return (p.v1 - p.v2 * z1) * u_hat + p.k2 - p.k1

    def dz2_zero(z1):
        return p.vy / (p.ky * (1.0 + z1 ** 2))

    return dz1_zero, dz2_zero


def bistable_bundle(params: BistableParams = BistableParams()) -> Bundle:
    """Bistable switch; ``normal_forms`` has ``"nf"`` (gauge ``log x2``) and ``"nf2"`` (gauge ``log x1``)."""
    v1, v2, vy, k1, k2, ky = params.v1, params.v2, params.vy, params.k1, params.k2, params.ky

    def f(x, u):
        x1, x2, y = x
        return np.array([
            v1 * u - k1 * x1 - y * x1,
            v2 * u - k2 * x2,
            vy / (1.0 + (x1 / x2) ** 2) - ky * y,
        ])

    original = DynamicalSystem(3, f, lambda x: x[2], [(0.0, np.inf), (0.0, np.inf), (-np.inf, np.inf)],
                               label="bistable", state_names=("x1", "x2", "y"))

    def dz2(z):
        return vy / (1.0 + z[0] ** 2) - ky * z[1]

    def f_z7(z, u_hat):
        return np.array([(v1 - v2 * z[0]) * u_hat + (k2 - k1 - z[1]) * z[0], dz2(z)])

    def f_z8(z, u_hat):
        return np.array([(v1 - v2 * z[0]) * z[0] * u_hat + (k2 - k1 - z[1]) * z[0], dz2(z)])

    zdom = [(0.0, np.inf), (-np.inf, np.inf)]
    names = ("z1", "z2")
    nf7 = NormalFormSystem(SCALING, 2, f_z7, lambda z, u_hat: v2 * u_hat - k2, lambda z: z[1], zdom,
                           label="bistable normal form (p_hat = log x2)", z_names=names)
    nf8 = NormalFormSystem(SCALING, 2, f_z8, lambda z, u_hat: v1 * u_hat - (k1 + z[1]), lambda z: z[1], zdom,
                           label="bistable normal form (p_hat = log x1)", z_names=names)

    def delta7(x):
        return np.array([x[0] / x[1], x[2], np.log(x[1])])

    def delta7_inv(w):
        x2 = np.exp(w[2])
        return np.array([w[0] * x2, x2, w[1]])

    def delta8(x):
        return np.array([x[0] / x[1], x[2], np.log(x[0])])

    def delta8_inv(w):
        x1 = np.exp(w[2])
        return np.array([x1, x1 / w[0], w[1]])

    def jac7(x):
        x1, x2, _ = x
        return np.array([[1 / x2, -x1 / x2 ** 2, 0.0], [0.0, 0.0, 1.0], [0.0, 1 / x2, 0.0]])

    def jac8(x):
        x1, x2, _ = x
        return np.array([[1 / x2, -x1 / x2 ** 2, 0.0], [0.0, 0.0, 1.0], [1 / x1, 0.0, 0.0]])

    return Bundle(
        name="bistable", original=original, group=SCALING, family=scaling_family([1.0, 1.0, 0.0]),
        delta=delta7, delta_inverse=delta7_inv, normal_forms={"nf": nf7, "nf2": nf8}, params=params,
        x_box=[(0.05, 20.0), (0.05, 20.0), (0.0, 2.0)], u_box=(0.05, 5.0), z_box=[(0.05, 10.0), (0.0, 2.0)],
        transmissible_box={"nf": [(0.05, 8.0), (0.0, 2.0), (0.05, 5.0)],
                           "nf2": [(0.05, 8.0), (0.0, 2.0), (0.05, 5.0)]},
        cross_section=CrossSection(anchor=lambda x: x[1] - 1.0, chart=lambda x: np.array([x[0] / x[1], x[2]])),
        deltas={"nf": (delta7, delta7_inv), "nf2": (delta8, delta8_inv)},
        delta_jacobians={"nf": jac7, "nf2": jac8},
    )


def bistable_gauge():
    """``tau_p(z) = log z1`` and its gradient: maps the first bistable normal form to the second."""
    return (lambda z: float(np.log(z[0]))), (lambda z: np.array([1.0 / z[0], 0.0]))


def circadian_state_names(N):
    return tuple([f"zP{k}" for k in range(1, N + 1)] + ["zCm"] + [f"zC{k}" for k in range(1, N + 1)])


def circadian_normal_form(params: CircadianParams = CircadianParams()) -> NormalFormSystem:
    """Circadian core in normal form over the scaling group.

    State ``z = (zP1..zPN, zCm, zC1..zCN)``, dimension ``2N + 1``, all
    components positive.  The output is ``zCm``.  With

        Omega(u) = v_P * zCN**alpha * u / (zPN**n * zCN**n) - k_Dm

    the adaptation error is
    ``(2n + 1 + alpha n)/(n + 1) * Omega + alpha * (k_p zC_{N-1}/zCN - k_DC)``.
    """
    p = params
    N, n, alpha = int(p.N), p.n, p.alpha
    r = n / (n + 1.0)
    iP = np.arange(N)
    iCm = N
    iC = N + 1 + np.arange(N)
    inflow_P = p.k_p if p.per_chain_kp else 1.0

    def omega(z, u_hat):
        zPN, zCN = z[iP[-1]], z[iC[-1]]
        return p.v_P * zCN ** alpha * u_hat / (zPN ** n * zCN ** n) - p.k_Dm

    def f_z(z, u_hat):
        om = omega(z, u_hat)
        zP, zC = z[iP], z[iC]
        dz = np.empty(2 * N + 1)
        dP = dz[iP[0]:iP[-1] + 1]
        dP[0] = p.k_TL - zP[0] * (p.k_p + p.k_DP + om)
        dP[1:N - 1] = inflow_P * zP[0:N - 2] - zP[1:N - 1] * (p.k_p + p.k_DP + om)
        dP[N - 1] = p.k_p * zP[N - 2] - zP[N - 1] * (p.k_DP + om)
        dz[iCm] = p.v_C / (zC[-1] ** n * zP[-1] ** n) - z[iCm] * (p.k_Dm - r * om)
        dC = dz[iC[0]:iC[-1] + 1]
        dC[0] = p.k_TL * z[iCm] - zC[0] * (p.k_p + p.k_DC - r * om)
        dC[1:N - 1] = p.k_p * zC[0:N - 2] - zC[1:N - 1] * (p.k_p + p.k_DC - r * om)
        dC[N - 1] = p.k_p * zC[N - 2] - zC[N - 1] * (p.k_DC - r * om)
        return dz

    def h_e(z, u_hat):
        zC = z[iC]
        return ((2 * n + 1 + alpha * n) / (n + 1.0) * omega(z, u_hat)
                + alpha * (p.k_p * zC[N - 2] / zC[N - 1] - p.k_DC))

    return NormalFormSystem(SCALING, 2 * N + 1, f_z, h_e, lambda z: z[iCm], [(0.0, np.inf)] * (2 * N + 1),
                            label="circadian normal form", z_names=circadian_state_names(N))


def circadian_feedback_input(params: CircadianParams, z):
    """Input value that zeroes the adaptation error of the circadian normal form at ``z``.

    The adaptation error is affine in ``Omega``, which is linear in the input,
    so the zeroing input is explicit.
    """
    p = params
    N, n, alpha = int(p.N), p.n, p.alpha
    zPN, zC = z[N - 1], z[N + 1:]
    gain = (2 * n + 1 + alpha * n) / (n + 1.0)
    if gain == 0:
        raise ValueError("adaptation error does not depend on the input for this alpha")
    omega = -alpha * (p.k_p * zC[N - 2] / zC[N - 1] - p.k_DC) / gain
    return (omega + p.k_Dm) * zPN ** n * zC[N - 1] ** n / (p.v_P * zC[N - 1] ** alpha)


@dataclass(frozen=True)
class PeriodicTransmissible:
    """Periodic transmissible input found on a limit cycle of the zero dynamics."""

    signal: signals.InputSignal
    z0: np.ndarray
    period: float
    times: np.ndarray
    values: np.ndarray


@lru_cache(maxsize=8)
def circadian_transmissible_input(params: CircadianParams = CircadianParams(), n_points=1024,
                                  settle=600.0) -> PeriodicTransmissible:
    """Tabulate the periodic input that keeps ``p_hat`` at zero.

    The zero dynamics ``dz/dt = f_z(z, u*(z))`` with ``u*`` from
    :func:`circadian_feedback_input` are run from the constant transmissible
    equilibrium (slightly perturbed) until they settle on a limit cycle.  One
    period, from an upward crossing of ``zCm`` through its settled value, is
    sampled and wrapped as a periodic cubic table.  ``z0`` is the state at the
    start of that period.

    For the default parameters the period is about 24.3 h, with low input at
    "night" and a bright "day".
    """
    nf = circadian_normal_form(params)
    N = int(params.N)

    def rhs(t, z):
        return nf.f_z(z, circadian_feedback_input(params, z))

    # chain equilibrium at the constant transmissible input is a good start
    z_start = np.full(2 * N + 1, 0.5) * (1.0 + 0.1 * np.arange(2 * N + 1) / (2 * N + 1))
    sol = solve_ivp(rhs, (0.0, settle), z_start, method="DOP853", rtol=1e-10, atol=1e-12)
    if sol.status != 0 or not np.all(sol.y[:, -1] > 0):
        raise RuntimeError(f"zero dynamics failed to settle: {sol.message}")
    z_mid = sol.y[:, -1]
    level = z_mid[N]

    def crossing(t, z):
        return z[N] - level

    crossing.direction = 1.0
    sol = solve_ivp(rhs, (0.0, 200.0), z_mid, method="DOP853", rtol=1e-11, atol=1e-13,
                    events=crossing, dense_output=True)
    hits = sol.t_events[0][sol.t_events[0] > 1e-6]
    if hits.size < 2:
        raise RuntimeError("zero dynamics show no periodic orbit")
    z0 = sol.sol(hits[0])
    period = float(hits[1] - hits[0])
    if np.max(np.abs(sol.sol(hits[1]) - z0) / np.maximum(1.0, np.abs(z0))) > 1e-6:
        raise RuntimeError("zero dynamics did not settle on a periodic orbit")

    times = np.linspace(0.0, period, n_points + 1)
    zs = sol.sol(hits[0] + times).T
    values = np.array([circadian_feedback_input(params, z) for z in zs])
    values[-1] = values[0]
    sig = signals.table(times, values, interpolation="cubic", period=period, domain=SCALING.domain)
    fine = np.linspace(0.0, period, 8 * n_points)
    if np.min(sig.values(fine)) < 0:
        raise RuntimeError("interpolated transmissible input turns negative; increase n_points")
    return PeriodicTransmissible(sig, z0, period, times, values)


#: light-cycle period (h) of the sinusoidal day/night profile
DAY = 24.0


def day_night_input(mean=0.3, relative_amplitude=1.0, period=DAY, phase=0.0):
    """Smooth 24 h light profile ``mean * (1 + a sin(2 pi t / period + phase))``.

    With the defaults the light is dark at one instant per night and peaks at
    ``2 * mean`` at midday.
    """
    return signals.sinusoid(mean, mean * relative_amplitude, 2 * np.pi / period, phase,
                            domain=SCALING.domain)


@dataclass
class CircadianBundle:
    """Normal-form-only bundle; there is no original-coordinate system."""

    name: str
    normal_forms: dict
    params: CircadianParams
    group: TransformationGroup = SCALING
    original = None
    family = None
    delta = None
    delta_inverse = None
    cross_section = None
    x_box = None
    u_box: tuple = (0.01, 10.0)
    z_box: Optional[list] = None
    transmissible_box: Optional[dict] = None
    deltas: dict = field(default_factory=dict)
    delta_jacobians: dict = field(default_factory=dict)

    @property
    def nf(self):
        return self.normal_forms["nf"]


def circadian_bundle(params: CircadianParams = CircadianParams()) -> CircadianBundle:
    m = 2 * int(params.N) + 1
    return CircadianBundle("circadian", {"nf": circadian_normal_form(params)}, params,
                           z_box=[(0.05, 5.0)] * m,
                           transmissible_box={"nf": [(0.05, 5.0)] * m + [(0.01, 10.0)]})


BUNDLES = {
    "feedforward": (feedforward_bundle, FeedForwardParams),
    "bistable": (bistable_bundle, BistableParams),
    "circadian": (circadian_bundle, CircadianParams),
}


def get_bundle(name, **overrides):
    """Build a bundle by name with optional parameter overrides."""
    try:
        factory, params_cls = BUNDLES[name]
    except KeyError:
        raise KeyError(f"unknown example {name!r}; available: {sorted(BUNDLES)}") from None
    return factory(params_cls(**overrides))
