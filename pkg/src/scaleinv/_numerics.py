"""Small numerical helpers shared across modules: boxes, sampling, finite differences."""

from __future__ import annotations

import warnings

import numpy as np
from scipy.stats import qmc

# cube root of machine epsilon; optimal central-difference step for smooth maps
CBRT_EPS = np.finfo(float).eps ** (1.0 / 3.0)


class DomainError(ValueError):
    """A value left its admissible domain."""


def as_box(box, n=None):
    """Normalize a sequence of (lo, hi) pairs to two float arrays."""
    arr = np.asarray(box, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, 2)
    if arr.shape[-1] != 2:
        raise ValueError(f"box must be a sequence of (lo, hi) pairs, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"box has {arr.shape[0]} intervals, expected {n}")
    if np.any(arr[:, 0] > arr[:, 1]):
        raise ValueError("box intervals must satisfy lo <= hi")
    return arr[:, 0].copy(), arr[:, 1].copy()


def unbounded(n):
    return [(-np.inf, np.inf)] * n


def positive(n):
    return [(0.0, np.inf)] * n


def in_box(x, box, closed=False):
    """True if every component of ``x`` lies inside ``box``.

    Bounds are open unless ``closed``; infinite bounds never exclude anything.
    """
    lo, hi = as_box(box, np.size(x))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(x)):
        return False
    if closed:
        return bool(np.all(x >= lo) and np.all(x <= hi))
    return bool(np.all((x > lo) | np.isneginf(lo)) and np.all((x < hi) | np.isposinf(hi)))


def _unit_to_box(unit, lo, hi, log_scale):
    out = np.empty_like(unit)
    for j in range(unit.shape[1]):
        if log_scale and lo[j] > 0:
            out[:, j] = np.exp(np.log(lo[j]) + unit[:, j] * (np.log(hi[j]) - np.log(lo[j])))
        else:
            out[:, j] = lo[j] + unit[:, j] * (hi[j] - lo[j])
    return out


def sample_box(box, n, rng=None, log_scale=True):
    """Draw ``n`` random points from a finite box.

    Components with a strictly positive lower bound are sampled log-uniformly
    when ``log_scale`` is set (scale-invariant systems live on positive orthants).
    """
    lo, hi = as_box(box)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("sampling box must be finite")
    rng = np.random.default_rng(rng)
    return _unit_to_box(rng.random((n, lo.size)), lo, hi, log_scale)


def sobol_box(box, n, log_scale=False, skip=1):
    """Deterministic low-discrepancy points in a finite box.

    Unscrambled Sobol; the first point (the origin corner) is skipped by default.
    """
    lo, hi = as_box(box)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("sampling box must be finite")
    sampler = qmc.Sobol(d=lo.size, scramble=False)
    if skip:
        sampler.fast_forward(skip)
    # Sobol balance warnings for non powers of two are irrelevant here
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        unit = sampler.random(n)
    return _unit_to_box(unit, lo, hi, log_scale)


def fd_jacobian(fun, x, rel_step=CBRT_EPS):
    """Central-difference Jacobian of a vector map at ``x``.

    Step per component is ``rel_step * max(1, |x_i|)``.
    """
    x = np.asarray(x, dtype=float)
    f0 = np.atleast_1d(np.asarray(fun(x), dtype=float))
    jac = np.empty((f0.size, x.size))
    for i in range(x.size):
        h = rel_step * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        jac[:, i] = (np.atleast_1d(fun(xp)) - np.atleast_1d(fun(xm))) / (xp[i] - xm[i])
    return jac


def fd_gradient(fun, x, rel_step=CBRT_EPS):
    """Central-difference gradient of a scalar function."""
    return fd_jacobian(lambda v: np.atleast_1d(fun(v)), x, rel_step)[0]


def fd_derivative(fun, t, rel_step=1e-6):
    """Central-difference derivative of a function of one real argument."""
    h = rel_step * max(1.0, abs(t))
    return (np.asarray(fun(t + h), dtype=float) - np.asarray(fun(t - h), dtype=float)) / (2 * h)
