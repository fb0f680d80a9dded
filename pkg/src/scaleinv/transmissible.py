"""Constant transmissible inputs of a normal form and their stability."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from ._numerics import CBRT_EPS, DomainError, as_box, fd_jacobian, in_box, sobol_box
from .dynamics import SimulationError
from .normalform import NormalFormSystem, simulate_normal_form
from .signals import constant

STABILITY_EPS = 1e-8
ROOT_TOL = 1e-10
#: roots closer than this (relative) to a finite domain bound are treated as boundary artifacts
BOUNDARY_TOL = 1e-8


@dataclass
class TransmissibleInput:
    """Constant input ``u_value`` zeroing the adaptation error at ``z_star``.

    ``equilibria`` lists every variable-part equilibrium found for the same
    input value (``z_star`` is the representative one); ``eigenvalues`` are
    those of the closed-loop Jacobian over ``(z, p_hat)`` at ``z_star``.
    """

    u_value: float
    z_star: np.ndarray
    classification: Optional[str] = None
    eigenvalues: Optional[np.ndarray] = None
    residual: float = 0.0
    degenerate: bool = False
    equilibria: List[np.ndarray] = field(default_factory=list)


def _newton(fun, x0, lower, upper, tol=ROOT_TOL, maxiter=100):
    """Damped Newton with backtracking on ``|F|``; steps are kept inside the open box."""
    x = np.asarray(x0, dtype=float).copy()
    fx = fun(x)
    norm = np.max(np.abs(fx))
    for _ in range(maxiter):
        if norm <= tol:
            return x, norm
        jac = fd_jacobian(fun, x, CBRT_EPS)
        try:
            step = np.linalg.solve(jac, -fx)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, -fx, rcond=None)[0]
        lam = 1.0
        while lam > 1e-10:
            trial = x + lam * step
            if np.all(trial > lower) and np.all(trial < upper):
                ft = fun(trial)
                nt = np.max(np.abs(ft))
                if np.isfinite(nt) and (nt < norm or nt <= tol):
                    break
            lam *= 0.5
        else:
            return x, norm
        x, fx, norm = trial, ft, nt
    return x, norm


def _closed_loop(nf: NormalFormSystem, u_value):
    m = nf.m

    def rhs(w):
        return nf.variable_part(w[:m], nf.group.apply(-w[m], u_value))

    return rhs


def classify_stability(nf: NormalFormSystem, cand: TransmissibleInput, eps=STABILITY_EPS) -> TransmissibleInput:
    """Classify by eigenvalues of the closed loop over ``(z, p_hat)`` at ``(z*, 0)``.

    The input is held at ``u_value``; the loop closes through
    ``u_hat = pi_{-p_hat}(u_value)``.  Stable iff all real parts < ``-eps``,
    unstable iff any > ``eps``, marginal otherwise.
    """
    jac = fd_jacobian(_closed_loop(nf, cand.u_value), np.append(cand.z_star, 0.0), CBRT_EPS)
    eig = np.linalg.eigvals(jac)
    re = eig.real
    if np.all(re < -eps):
        label = "stable"
    elif np.any(re > eps):
        label = "unstable"
    else:
        label = "marginal"
    return replace(cand, classification=label, eigenvalues=eig)


def find_constant_transmissible(nf: NormalFormSystem, search_box, n_starts=128, dedup_tol=1e-6,
                                classify=True) -> List[TransmissibleInput]:
    """Roots of ``(f_z(z, u), h_e(z, u)) = 0`` by multi-start damped Newton.

    Starts are unscrambled Sobol points in ``search_box`` (intervals for
    ``z_1..z_m`` then ``u``).  Roots are deduplicated in relative distance,
    verified to residual ``<= 1e-10``, and dropped when they sit within a
    relative 1e-8 of a finite domain bound (Newton iterates can creep toward
    roots on the excluded boundary, e.g. a factor ``z1`` in ``f_z``).  The
    remainder are grouped by input value: each
    returned record is one distinct transmissible input.  A stable
    equilibrium, when one exists, is chosen as ``z_star``.

    Returns an empty list when nothing converges.
    """
    m = nf.m
    box_lo, box_hi = as_box(search_box, m + 1)
    zlo, zhi = as_box(nf.z_domain, m)
    lower = np.append(zlo, nf.group.domain[0])
    upper = np.append(zhi, nf.group.domain[1])

    def fun(w):
        with np.errstate(all="ignore"):
            return nf.variable_part(w[:m], w[m])

    roots = []
    for start in sobol_box(list(zip(box_lo, box_hi)), n_starts):
        if not (np.all(start > lower) and np.all(start < upper)):
            continue
        try:
            w, res = _newton(fun, start, lower, upper)
        except (DomainError, ValueError, ArithmeticError):
            continue
        if not res <= ROOT_TOL:
            continue
        scale = np.maximum(1.0, np.abs(w))
        if np.any((w - lower) / scale < BOUNDARY_TOL) or np.any((upper - w) / scale < BOUNDARY_TOL):
            continue
        if any(np.max(np.abs(w - r) / np.maximum(1.0, np.abs(r))) < dedup_tol for r, _ in roots):
            continue
        roots.append((w, res))
    roots.sort(key=lambda r: (r[0][m], *r[0][:m]))

    groups: List[List] = []
    for w, res in roots:
        for g in groups:
            if abs(w[m] - g[0][0][m]) / max(1.0, abs(w[m])) < dedup_tol:
                g.append((w, res))
                break
        else:
            groups.append([(w, res)])

    out = []
    for g in groups:
        cands = []
        for w, res in g:
            c = TransmissibleInput(u_value=float(w[m]), z_star=w[:m].copy(), residual=float(res))
            jac = fd_jacobian(fun, w, CBRT_EPS)
            c.degenerate = bool(np.linalg.cond(jac) > 1e12)
            cands.append(classify_stability(nf, c) if classify else c)
        best = next((c for c in cands if c.classification == "stable"), cands[0])
        best.equilibria = [c.z_star for c in cands]
        out.append(best)
    return out


@dataclass
class BasinResult:
    fraction: float
    n_samples: int
    converged: np.ndarray = field(repr=False)
    initial: np.ndarray = field(repr=False)
    failures: dict = field(default_factory=dict)


def basin_sample(nf: NormalFormSystem, ti: TransmissibleInput, region, n_samples=64, horizon=200.0,
                 tol=1e-3, rtol=1e-8, atol=1e-10) -> BasinResult:
    """Fraction of quasi-random initial ``(z, p_hat)`` in ``region`` that converge to ``(z*, 0)``.

    The input is held at ``u_value``.  Convergence is judged at ``horizon``
    by ``|p_hat| <= tol`` and ``max|z - z*| <= tol``.  Failed integrations
    count as non-converged and are tallied in ``failures`` by error type.
    This is sampling evidence, not a proof of (global) stability.

    Raises
    ------
    ValueError
        If ``n_samples`` is not positive (the fraction would be undefined).
    """
    if n_samples < 1:
        raise ValueError("basin_sample needs at least one sample; fraction undefined")
    m = nf.m
    starts = sobol_box(region, n_samples)
    u = constant(ti.u_value, nf.group.domain)
    ok = np.zeros(n_samples, dtype=bool)
    failures: dict = {}
    for k, w0 in enumerate(starts):
        if not in_box(w0[:m], nf.z_domain):
            failures["outside_domain"] = failures.get("outside_domain", 0) + 1
            continue
        try:
            tr = simulate_normal_form(nf, w0[:m], w0[m], u, (0.0, horizon), rtol=rtol, atol=atol)
        except (SimulationError, DomainError) as exc:
            name = type(exc).__name__
            failures[name] = failures.get(name, 0) + 1
            continue
        end = tr.x[-1]
        ok[k] = abs(end[m]) <= tol and np.max(np.abs(end[:m] - ti.z_star)) <= tol
    return BasinResult(float(ok.mean()), n_samples, ok, starts, failures)
