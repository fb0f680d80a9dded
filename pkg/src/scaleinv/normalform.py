"""Normal form of invariant systems: simulation, coordinate change, gauge, rectification.

A normal form couples a universal integral-feedback part

    dp_hat/dt = e,    u_hat = pi_{-p_hat}(u)

to a system-specific variable part

    dz/dt = f_z(z, u_hat),    e = h_e(z, u_hat),    y = h_z(z).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from ._numerics import CBRT_EPS, DomainError, as_box, fd_gradient, fd_jacobian, in_box, sample_box, unbounded
from .dynamics import DEFAULT_ATOL, DEFAULT_RTOL, DynamicalSystem, Trajectory, _eval_channels, simulate
from .equivariance import pde_residuals
from .groups import StateTransformationFamily, TransformationGroup, infinitesimal, translation_family


class NormalFormError(ValueError):
    """A candidate transformation does not produce a normal form."""

    def __init__(self, message, worst=None):
        super().__init__(message)
        self.worst = worst


class RectificationError(RuntimeError):
    """The group orbit did not cross the cross-section exactly once."""


class OrbitEscapeError(RectificationError):
    pass


class AmbiguousCrossingError(RectificationError):
    pass


@dataclass(frozen=True)
class NormalFormSystem:
    """Variable part ``(f_z, h_e, h_z)`` of a normal form over an input group.

    All three maps see the input only through ``u_hat``.
    """

    group: TransformationGroup
    m: int
    f_z: Callable[[np.ndarray, float], np.ndarray]
    h_e: Callable[[np.ndarray, float], float]
    h_z: Callable[[np.ndarray], float]
    z_domain: Optional[Sequence] = None
    label: str = "normal form"
    z_names: Optional[Sequence[str]] = None

    def __post_init__(self):
        dom = unbounded(self.m) if self.z_domain is None else self.z_domain
        lo, hi = as_box(dom, self.m)
        object.__setattr__(self, "z_domain", tuple(zip(lo.tolist(), hi.tolist())))
        names = self.z_names or [f"z{i + 1}" for i in range(self.m)]
        object.__setattr__(self, "z_names", tuple(names))

    def variable_part(self, z, u_hat):
        """Stacked ``(f_z(z, u_hat), h_e(z, u_hat))``."""
        z = np.asarray(z, dtype=float)
        return np.append(np.asarray(self.f_z(z, u_hat), dtype=float), float(self.h_e(z, u_hat)))

    def u_hat(self, p_hat, u):
        u_hat = self.group.apply(-p_hat, u)
        if not self.group.contains(u_hat):
            raise DomainError(f"u_hat = {u_hat} outside the input domain {self.group.domain}")
        return u_hat


def as_flat_system(nf: NormalFormSystem):
    """Flat system over ``(z, p_hat)`` and its canonical equivariance family.

    The family ``rho_p(z, p_hat) = (z, p_hat + p)`` is the sufficiency witness.
    Extra channels ``u_hat`` and ``e`` are attached for :func:`simulate`.
    """
    m = nf.m

    def f(x, u):
        return nf.variable_part(x[:m], nf.u_hat(x[m], u))

    def h(x):
        return nf.h_z(x[:m])

    channels = {
        "u_hat": lambda x, u: nf.u_hat(x[m], u),
        "e": lambda x, u: nf.h_e(x[:m], nf.u_hat(x[m], u)),
    }
    system = DynamicalSystem(
        n=m + 1, f=f, h=h, state_domain=list(nf.z_domain) + [(-np.inf, np.inf)],
        label=f"{nf.label} (flat)", state_names=list(nf.z_names) + ["p_hat"], channels=channels,
    )
    weights = np.zeros(m + 1)
    weights[m] = 1.0
    return system, translation_family(weights, label="canonical shift")


def simulate_normal_form(nf: NormalFormSystem, z0, p_hat0, u, t_span, rtol=DEFAULT_RTOL,
                         atol=DEFAULT_ATOL) -> Trajectory:
    """Integrate the normal form; channels ``y``, ``u_hat``, ``e`` and state ``p_hat``.

    The estimator is integrated as the offset ``p_hat - p_hat0``, so the step
    size control sees the same states for runs that differ only by a group
    shift of ``(p_hat0, u)``.  Shifted runs then agree to rounding error
    rather than to the integrator tolerance.
    """
    system, _ = as_flat_system(nf)
    z0 = np.atleast_1d(np.asarray(z0, dtype=float))
    if not in_box(z0, nf.z_domain):
        raise DomainError(f"z0 = {z0} outside z domain {nf.z_domain}")
    m, p0 = nf.m, float(p_hat0)
    offset = DynamicalSystem(
        n=m + 1, f=lambda x, v: nf.variable_part(x[:m], nf.u_hat(x[m] + p0, v)), h=lambda x: nf.h_z(x[:m]),
        state_domain=system.state_domain, label=system.label, state_names=system.state_names,
    )
    tr = simulate(offset, np.append(z0, 0.0), u, t_span, rtol=rtol, atol=atol)
    shift = np.zeros(m + 1)
    shift[m] = p0
    x = tr.x + shift
    fns = {"y": lambda xx, uu: system.output(xx), **system.channels}
    return Trajectory(tr.t, x, _eval_channels(fns, tr.t, x, u), system.state_names,
                      lambda t: tr(t) + shift, fns, u)


@dataclass
class CoordinateChange:
    """Result of :func:`apply_coordinate_change`: the normal form plus check statistics."""

    normal_form: NormalFormSystem
    f_star: Callable = field(repr=False)
    roundtrip_error: float = 0.0
    structure_error: float = 0.0


def apply_coordinate_change(system: DynamicalSystem, group: TransformationGroup, delta, delta_inverse,
                            x_box, u_box, n_samples=200, p_range=(-2.0, 2.0), tol=1e-8,
                            delta_jacobian=None, seed=0, z_domain=None) -> CoordinateChange:
    """Transform ``system`` into normal form with candidate ``delta: x -> (z, p_hat)``.

    ``f*(z, p_hat, u) = (d delta/dx)(x) f(x, u)`` at ``x = delta^-1(z, p_hat)``;
    the variable part is read off at ``p_hat = 0``.  Two checks run on
    ``n_samples`` points (``x`` from ``x_box``, ``u`` from ``u_box``,
    ``p_hat`` uniform on ``p_range``):

    * round trip ``delta(delta^-1(z, p_hat)) == (z, p_hat)`` to ``tol``;
    * structure ``f*(z, p_hat, u) == f*(z, 0, pi_{-p_hat}(u))`` to ``tol``
      after normalizing by ``max(1, |f*|)``.

    Raises
    ------
    NormalFormError
        On either check failing; ``worst`` holds the offending sample.
    """
    n = system.n
    m = n - 1

    def jac(x):
        if delta_jacobian is not None:
            return np.asarray(delta_jacobian(x), dtype=float)
        return fd_jacobian(lambda v: np.asarray(delta(v), dtype=float), x, CBRT_EPS)

    def f_star(z, p_hat, u):
        x = np.asarray(delta_inverse(np.append(z, p_hat)), dtype=float)
        return jac(x) @ system.rhs(x, u)

    rng = np.random.default_rng(seed)
    xs = sample_box(x_box, n_samples, rng)
    us = sample_box([u_box], n_samples, rng)[:, 0]
    ps = sample_box([p_range], n_samples, rng, log_scale=False)[:, 0]

    rt_err = 0.0
    st_err, worst = 0.0, None
    for x, u, p_hat in zip(xs, us, ps):
        zp = np.asarray(delta(x), dtype=float)
        back = np.asarray(delta_inverse(zp), dtype=float)
        err = float(np.max(np.abs(back - x) / np.maximum(1.0, np.abs(x))))
        zq = np.append(zp[:m], p_hat)
        err = max(err, float(np.max(np.abs(np.asarray(delta(delta_inverse(zq))) - zq)
                                    / np.maximum(1.0, np.abs(zq)))))
        if not err <= tol:
            raise NormalFormError(f"delta round trip failed: error {err:.3g} at x={x.tolist()}",
                                  worst=dict(x=x.tolist(), error=err))
        rt_err = max(rt_err, err)

        z = zp[:m]
        with np.errstate(all="ignore"):
            try:
                lhs = f_star(z, p_hat, u)
                rhs = f_star(z, 0.0, group.apply(-p_hat, u))
                e = float(np.max(np.abs(lhs - rhs)) / max(1.0, np.max(np.abs(lhs)), np.max(np.abs(rhs))))
            except (ArithmeticError, ValueError, DomainError):
                e = np.inf
        if not np.isfinite(e):
            e = np.inf
        if worst is None or e > st_err:
            st_err, worst = e, dict(z=z.tolist(), p_hat=float(p_hat), u=float(u), error=e)
    if not st_err <= tol:
        raise NormalFormError(
            f"structure check failed: f*(z, p, u) != f*(z, 0, pi_-p(u)), worst error {st_err:.3g} "
            f"at z={worst['z']}, p_hat={worst['p_hat']:.6g}, u={worst['u']:.6g}", worst=worst)

    def f_z(z, u_hat):
        return f_star(z, 0.0, u_hat)[:m]

    def h_e(z, u_hat):
        return float(f_star(z, 0.0, u_hat)[m])

    def h_z(z):
        return system.output(delta_inverse(np.append(z, 0.0)))

    nf = NormalFormSystem(group=group, m=m, f_z=f_z, h_e=h_e, h_z=h_z, z_domain=z_domain,
                          label=f"{system.label} (normal form)")
    return CoordinateChange(nf, f_star, rt_err, st_err)


def gauge_transform(nf: NormalFormSystem, tau_p, grad_tau_p=None) -> NormalFormSystem:
    """Regauge ``p_tilde = p_hat + tau_p(z)``.

    ``f~_z(z, u) = f_z(z, pi_tau(z)(u))`` and
    ``h~_e(z, u) = h_e(z, pi_tau(z)(u)) + grad tau_p(z) . f_z(z, pi_tau(z)(u))``.
    The gradient is taken by central differences when not supplied.
    """
    group = nf.group

    def grad(z):
        if grad_tau_p is not None:
            return np.asarray(grad_tau_p(z), dtype=float)
        return fd_gradient(tau_p, z, CBRT_EPS)

    def inner_input(z, u):
        v = group.apply(tau_p(z), u)
        if not group.contains(v):
            raise DomainError(f"gauged input {v} outside the input domain {group.domain}")
        return v

    def f_z(z, u):
        return nf.f_z(z, inner_input(z, u))

    def h_e(z, u):
        v = inner_input(z, u)
        return float(nf.h_e(z, v) + grad(z) @ np.asarray(nf.f_z(z, v), dtype=float))

    return NormalFormSystem(group=group, m=nf.m, f_z=f_z, h_e=h_e, h_z=nf.h_z, z_domain=nf.z_domain,
                            label=f"{nf.label} (gauged)", z_names=nf.z_names)


def constant_gauge(value):
    """``tau_p(z) = value`` with its zero gradient, for :func:`gauge_transform`."""
    return (lambda z: float(value)), (lambda z: np.zeros(np.size(z)))


@dataclass(frozen=True)
class CrossSection:
    """Level set ``{anchor = 0}`` transversal to the group orbits, with a chart on it."""

    anchor: Callable[[np.ndarray], float]
    chart: Callable[[np.ndarray], np.ndarray]


def rectify_group_action(family: StateTransformationFamily, cross_section: CrossSection, x,
                         s_range=(-50.0, 50.0), rtol=1e-12, atol=1e-14, verify=True, verify_tol=1e-6):
    """Canonical coordinates ``(z, p_hat)`` of ``x`` by flowing along the group orbit.

    Integrates ``dx/ds = eta(x)`` forward and backward from ``x`` over
    ``s_range`` and locates the crossing ``s*`` with the cross-section.
    Returns ``z = chart(x(s*))`` and ``p_hat = -s*``.

    With ``verify`` set (default), the rectified map is checked against the rectifying
    PDEs at ``x`` (central-difference step 1e-4 in the group parameter).

    Raises
    ------
    OrbitEscapeError
        No crossing within ``s_range``.
    AmbiguousCrossingError
        More than one crossing.
    """
    x = np.asarray(x, dtype=float)
    g0 = float(cross_section.anchor(x))

    def eta(s, v):
        return infinitesimal(family, v)

    def event(s, v):
        return float(cross_section.anchor(v))

    crossings = []
    for s_end in s_range:
        if s_end == 0:
            continue
        sol = solve_ivp(eta, (0.0, s_end), x, method="DOP853", rtol=rtol, atol=atol,
                        events=event, dense_output=True)
        for s_hit, x_hit in zip(sol.t_events[0], sol.y_events[0]):
            if s_hit != 0.0:
                crossings.append((float(s_hit), x_hit))
    if g0 == 0.0:
        crossings.append((0.0, x))
    if not crossings:
        raise OrbitEscapeError(f"orbit through {x.tolist()} does not reach the cross-section "
                               f"for s in {tuple(s_range)}")
    if len(crossings) > 1:
        raise AmbiguousCrossingError(f"orbit through {x.tolist()} crosses the cross-section "
                                     f"{len(crossings)} times at s={[c[0] for c in crossings]}")
    s_star, foot = crossings[0]
    z = np.atleast_1d(np.asarray(cross_section.chart(foot), dtype=float))
    p_hat = -s_star
    if verify:
        dz, dp = rectifying_map(family, cross_section, s_range, rtol, atol)
        res_z, res_p = pde_residuals(family, dz, dp, x, rel_step=1e-4)
        worst = max(float(np.max(np.abs(res_z), initial=0.0)), abs(res_p))
        if worst > verify_tol:
            raise RectificationError(f"rectified map violates the PDE conditions by {worst:.3g}")
    return z, p_hat


def rectifying_map(family, cross_section, s_range=(-50.0, 50.0), rtol=1e-12, atol=1e-14):
    """``(delta_z, delta_p)`` callables backed by :func:`rectify_group_action`.

    Both share one orbit integration per query point (the last result is cached).
    """
    cache = {}

    def both(x):
        key = tuple(np.asarray(x, dtype=float).tolist())
        if key not in cache:
            cache.clear()
            cache[key] = rectify_group_action(family, cross_section, x, s_range, rtol, atol, verify=False)
        return cache[key]

    def delta_z(x):
        return both(x)[0]

    def delta_p(x):
        return both(x)[1]

    return delta_z, delta_p
