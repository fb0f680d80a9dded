"""Numerical checks of equivariance, I/O invariance and the rectifying PDE conditions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ._numerics import CBRT_EPS, DomainError, fd_jacobian, sample_box
from .dynamics import DEFAULT_ATOL, DEFAULT_RTOL, DynamicalSystem, simulate
from .groups import INFINITESIMAL_STEP, StateTransformationFamily, TransformationGroup, infinitesimal
from .signals import InputSignal, transform_signal

DEFAULT_EQUIVARIANCE_TOL = 1e-8


def equivariance_residual(system: DynamicalSystem, group: TransformationGroup,
                          family: StateTransformationFamily, x, u, p):
    """Residuals of the equivariance identities at one point.

    Returns
    -------
    r_f : ndarray
        ``f(rho_p(x), pi_p(u)) - (d rho_p / dx)(x) f(x, u)``
    r_h : float
        ``h(rho_p(x)) - h(x)``

    Raises
    ------
    DomainError
        If ``rho_p(x)`` leaves the state domain.
    """
    x = np.asarray(x, dtype=float)
    xp = family(p, x)
    if not system.in_domain(xp):
        raise DomainError(f"rho_p(x) = {xp} outside the state domain (p={p})")
    r_f = system.rhs(xp, group.apply(p, u)) - family.jacobian(p, x) @ system.rhs(x, u)
    r_h = system.output(xp) - system.output(x)
    return r_f, r_h


@dataclass
class EquivarianceReport:
    """Point-wise residual sweep.

    ``rows`` are dicts with keys ``x``, ``u``, ``p``, ``r_f``, ``r_h`` and
    ``normalized``; ``worst`` is the row with the largest normalized residual.
    """

    rows: List[dict]
    tol: float
    max_residual: float = 0.0
    worst: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol

    def csv_rows(self):
        """Flat rows for CSV export: ``x_i..., u, p, r_f_i..., r_h, normalized``."""
        out = []
        for r in self.rows:
            row = {f"x{i + 1}": v for i, v in enumerate(r["x"])}
            row.update(u=r["u"], p=r["p"])
            row.update({f"r_f{i + 1}": v for i, v in enumerate(r["r_f"])})
            row.update(r_h=r["r_h"], normalized=r["normalized"])
            out.append(row)
        return out


def equivariance_sweep(system, group, family, x_box, u_box, p_range=(-2.0, 2.0),
                       n_samples=100, seed=0, tol=DEFAULT_EQUIVARIANCE_TOL) -> EquivarianceReport:
    """Sample ``(x, u, p)`` and record normalized equivariance residuals.

    States and inputs are drawn log-uniformly on positive intervals, uniformly
    otherwise.  Each residual is normalized by ``max(1, |f|)`` with ``|f|`` the
    larger sup-norm of the two sides of the identity (``max(1, |h|)`` for the
    output part).
    """
    rng = np.random.default_rng(seed)
    xs = sample_box(x_box, n_samples, rng)
    us = sample_box([u_box], n_samples, rng)[:, 0]
    ps = sample_box([p_range], n_samples, rng, log_scale=False)[:, 0]
    report = EquivarianceReport(rows=[], tol=tol)
    for x, u, p in zip(xs, us, ps):
        r_f, r_h = equivariance_residual(system, group, family, x, u, p)
        lhs = system.rhs(family(p, x), group.apply(p, u))
        scale_f = max(1.0, float(np.max(np.abs(lhs))), float(np.max(np.abs(lhs - r_f))))
        scale_h = max(1.0, abs(system.output(x)))
        norm = max(float(np.max(np.abs(r_f))) / scale_f, abs(r_h) / scale_h)
        row = dict(x=x.tolist(), u=float(u), p=float(p), r_f=r_f.tolist(), r_h=float(r_h), normalized=norm)
        report.rows.append(row)
        if report.worst is None or norm > report.max_residual:
            report.max_residual, report.worst = norm, row
    return report


@dataclass
class InvarianceResult:
    max_deviation: float
    tol: float
    t: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    y_transformed: np.ndarray = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol

    def __float__(self):
        return self.max_deviation


def invariance_io_test(system, group, family, x0, u: InputSignal, p, t_span, tol=1e-6,
                       n_grid=401, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL) -> InvarianceResult:
    """Compare outputs of ``(x0, u)`` and ``(rho_p(x0), pi_p(u))``.

    This tests the witness ``x0' = rho_p(x0)`` only.  Outputs are compared on
    a shared uniform grid of ``n_grid`` points (at least 200) via dense output.
    """
    if n_grid < 200:
        raise ValueError("comparison grid needs at least 200 points")
    x0 = np.asarray(x0, dtype=float)
    x0p = family(p, x0)
    tr1 = simulate(system, x0, u, t_span, rtol=rtol, atol=atol)
    tr2 = simulate(system, x0p, transform_signal(group, p, u), t_span, rtol=rtol, atol=atol)
    grid = np.linspace(t_span[0], t_span[1], n_grid)
    y1 = np.array([system.output(x) for x in tr1(grid)])
    y2 = np.array([system.output(x) for x in tr2(grid)])
    return InvarianceResult(float(np.max(np.abs(y1 - y2))), tol, grid, y1, y2)


def pde_residuals(family: StateTransformationFamily, delta_z, delta_p, x, rel_step=INFINITESIMAL_STEP):
    """Residuals ``(E delta_z, E delta_p - 1)`` of the rectifying PDEs at ``x``.

    ``E g = sum_i eta_i dg/dx_i`` is evaluated as a central difference along
    ``eta`` with step ``rel_step`` in the group parameter,
    ``(g(x + h eta) - g(x - h eta)) / 2h``.  Measuring the step in ``p``
    rather than in ``x`` keeps the relative perturbation uniform for scaling
    families, including near the origin.  Both residuals vanish for a valid
    transformation into normal form.
    """
    x = np.asarray(x, dtype=float)
    eta = infinitesimal(family, x)
    h = float(rel_step)
    fwd, bwd = x + h * eta, x - h * eta
    z_f, p_f = np.atleast_1d(np.asarray(delta_z(fwd), dtype=float)), float(delta_p(fwd))
    z_b, p_b = np.atleast_1d(np.asarray(delta_z(bwd), dtype=float)), float(delta_p(bwd))
    return (z_f - z_b) / (2 * h), (p_f - p_b) / (2 * h) - 1.0


def independence_margin(delta_z, delta_p, x, rel_step=CBRT_EPS):
    """Smallest singular value of the row-normalized Jacobian of ``(delta_z, delta_p)``.

    Functional independence at ``x`` holds when this is clearly positive
    (the default threshold used by callers is 1e-8).
    """
    def delta(v):
        return np.concatenate([np.atleast_1d(delta_z(v)), [delta_p(v)]])

    jac = fd_jacobian(delta, np.asarray(x, dtype=float), rel_step)
    norms = np.linalg.norm(jac, axis=1)
    norms[norms == 0] = 1.0
    return float(np.linalg.svd(jac / norms[:, None], compute_uv=False)[-1])
