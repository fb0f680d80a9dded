"""One-parameter Lie groups of input transformations and state-transformation families.

All groups are additively parametrized: ``apply(p2, apply(p1, u)) == apply(p1 + p2, u)``
and ``apply(0, u) == u``.  User-supplied groups are not reparametrized; use
:func:`verify_group_axioms` to check a candidate before relying on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._numerics import CBRT_EPS, fd_derivative, fd_jacobian

#: default relative step of the central difference in the group parameter
INFINITESIMAL_STEP = 1e-6


@dataclass(frozen=True)
class TransformationGroup:
    """Additively parametrized group ``{pi_p}`` acting on scalar input values.

    Parameters
    ----------
    apply : callable
        ``apply(p, u)``; must accept numpy arrays for ``u``.
    domain : tuple
        Interval ``(lo, hi)`` of admissible input values.
    label : str
    generator : callable, optional
        Closed-form infinitesimal ``d/dp apply(p, u) |_{p=0}``.
    """

    apply: Callable[[float, float], float]
    domain: tuple = (-np.inf, np.inf)
    label: str = "group"
    generator: Optional[Callable[[float], float]] = None

    def __call__(self, p, u):
        return self.apply(p, u)

    def inverse(self, p, u):
        return self.apply(-p, u)

    def contains(self, u) -> bool:
        lo, hi = self.domain
        u = np.asarray(u, dtype=float)
        return bool(np.all(np.isfinite(u)) and np.all(u >= lo) and np.all(u <= hi))

    def infinitesimal(self, u, rel_step=INFINITESIMAL_STEP):
        if self.generator is not None:
            return self.generator(u)
        return fd_derivative(lambda p: self.apply(p, u), 0.0, rel_step)


SCALING = TransformationGroup(
    apply=lambda p, u: np.exp(p) * u,
    domain=(0.0, np.inf),
    label="scaling",
    generator=lambda u: u,
)

TRANSLATION = TransformationGroup(
    apply=lambda p, u: u + p,
    domain=(-np.inf, np.inf),
    label="translation",
    generator=lambda u: np.ones_like(np.asarray(u, dtype=float)),
)

BUILTIN_GROUPS = {"scaling": SCALING, "translation": TRANSLATION}


def get_group(name: str) -> TransformationGroup:
    try:
        return BUILTIN_GROUPS[name]
    except KeyError:
        raise KeyError(f"unknown group {name!r}; builtins are {sorted(BUILTIN_GROUPS)}") from None


@dataclass(frozen=True)
class StateTransformationFamily:
    """One-parameter family ``rho_p`` of state transformations.

    ``jacobian_x(p, x)`` and ``generator(x)`` are optional closed forms; when
    absent, central finite differences are used.
    """

    apply: Callable[[float, np.ndarray], np.ndarray]
    n: int
    jacobian_x: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    generator: Optional[Callable[[np.ndarray], np.ndarray]] = None
    label: str = "family"

    def __call__(self, p, x):
        return np.asarray(self.apply(p, np.asarray(x, dtype=float)), dtype=float)

    def jacobian(self, p, x, rel_step=CBRT_EPS):
        x = np.asarray(x, dtype=float)
        if self.jacobian_x is not None:
            return np.asarray(self.jacobian_x(p, x), dtype=float)
        return fd_jacobian(lambda v: self(p, v), x, rel_step)


def infinitesimal(family: StateTransformationFamily, x, rel_step=INFINITESIMAL_STEP, closed_form=True):
    """Infinitesimal ``eta(x) = d rho_p(x) / dp`` at ``p = 0``.

    Uses the family's closed-form generator when present and ``closed_form``
    is set, otherwise a central difference in ``p`` with step ``rel_step``.
    """
    x = np.asarray(x, dtype=float)
    if closed_form and family.generator is not None:
        return np.asarray(family.generator(x), dtype=float)
    return np.atleast_1d(fd_derivative(lambda p: family(p, x), 0.0, rel_step))


def scaling_family(weights: Sequence[float], label="scaling") -> StateTransformationFamily:
    """``rho_p(x) = exp(p * w) * x`` componentwise."""
    w = np.asarray(weights, dtype=float)
    return StateTransformationFamily(
        apply=lambda p, x: np.exp(p * w) * x,
        n=w.size,
        jacobian_x=lambda p, x: np.diag(np.exp(p * w)),
        generator=lambda x: w * x,
        label=label,
    )


def translation_family(weights: Sequence[float], label="translation") -> StateTransformationFamily:
    """``rho_p(x) = x + p * w``."""
    w = np.asarray(weights, dtype=float)
    return StateTransformationFamily(
        apply=lambda p, x: x + p * w,
        n=w.size,
        jacobian_x=lambda p, x: np.eye(w.size),
        generator=lambda x: w.copy(),
        label=label,
    )


@dataclass
class AxiomReport:
    """Worst absolute residuals of the group axioms over a sample grid."""

    identity: float
    composition: float
    inverse: float
    tol: float
    worst_composition: tuple = field(default=())

    @property
    def passed(self) -> bool:
        return max(self.identity, self.composition, self.inverse) <= self.tol


def verify_group_axioms(group, values, params, tol=1e-10) -> AxiomReport:
    """Check identity, additive composition and inverse on a sample grid.

    Parameters
    ----------
    group : TransformationGroup or callable ``(p, u) -> u``
    values : sequence of input values inside the group's domain
    params : sequence of group parameters
    tol : float
        Absolute tolerance for the pass verdict.

    Raises
    ------
    ValueError
        If either sample set is empty.
    """
    apply = group.apply if isinstance(group, TransformationGroup) else group
    values = np.asarray(values, dtype=float).ravel()
    params = np.asarray(params, dtype=float).ravel()
    if values.size == 0 or params.size == 0:
        raise ValueError("verify_group_axioms needs non-empty value and parameter samples")

    ident = float(np.max(np.abs(apply(0.0, values) - values)))
    comp, worst = 0.0, ()
    inv = 0.0
    for p1 in params:
        inv = max(inv, float(np.max(np.abs(apply(-p1, apply(p1, values)) - values))))
        for p2 in params:
            res = np.abs(apply(p2, apply(p1, values)) - apply(p1 + p2, values))
            k = int(np.argmax(res))
            if res[k] > comp:
                comp, worst = float(res[k]), (float(values[k]), float(p1), float(p2))
    return AxiomReport(identity=ident, composition=comp, inverse=inv, tol=tol, worst_composition=worst)
