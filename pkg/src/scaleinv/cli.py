"""Command-line front end: run JSON-described scenarios and write CSV/SVG artifacts.

Usage::

    scaleinv run config.json [--out DIR] [--rtol R] [--atol A]
    scaleinv validate config.json
    scaleinv list-examples

Exit codes: 0 success, 1 check or numerical failure, 2 configuration error.
Without ``--out`` (or an ``output_dir`` entry) results go to
``$SCALEINV_OUTPUT_DIR/<scenario name>``, falling back to ``./scaleinv-output``.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import __version__
from ._numerics import DomainError, fd_jacobian, sample_box
from .config import ConfigError, Scenario, load, resolve
from .dynamics import DEFAULT_ATOL, DEFAULT_RTOL, SimulationError, simulate
from .equivariance import equivariance_sweep, independence_margin, pde_residuals
from .examples import BUNDLES, bistable_nullclines, circadian_transmissible_input, day_night_input
from .normalform import (
    NormalFormError,
    RectificationError,
    gauge_transform,
    rectify_group_action,
    simulate_normal_form,
)
from .output import line_plot, write_csv, write_dict_rows, write_json
from .signals import constant, piecewise, transform_signal
from .transmissible import find_constant_transmissible

ENV_OUTPUT_DIR = "SCALEINV_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "scaleinv-output"

# starting states used when a config does not give one
_DEFAULT_X0 = {"feedforward": [1.0, 0.5], "bistable": [1.0, 1.0, 0.5]}
_DEFAULT_Z0 = {("feedforward", "nf"): [0.5], ("bistable", "nf"): [1.0, 0.5], ("bistable", "nf2"): [1.0, 0.5]}


@dataclass
class Manifest:
    """Files written by a scenario plus its summary record."""

    files: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.summary.get("verdict") == "PASS"


class _Run:
    """Per-scenario context: output directory, tolerances, collected checks."""

    def __init__(self, sc: Scenario, out_dir, rtol, atol):
        self.sc = sc
        self.out_dir = out_dir
        self.rtol = rtol
        self.atol = atol
        self.manifest = Manifest()
        self.checks = []
        self.info = {}

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def csv(self, name, header, rows):
        self.manifest.files.append(write_csv(self.path(name), header, rows))

    def dict_csv(self, name, rows):
        self.manifest.files.append(write_dict_rows(self.path(name), rows))

    def trajectory_csv(self, name, tr, signal):
        cols = tr.columns()
        states = set(tr.state_names)
        # a channel sharing a state's name (output y of state y) is suffixed
        header = ["t", "u"] + [n for n, _ in cols[1:1 + len(tr.state_names)]]
        header += [f"{n}_out" if n in states else n for n, _ in cols[1 + len(tr.state_names):]]
        data = np.column_stack([tr.t, signal.values(tr.t)] + [v for _, v in cols[1:]])
        self.csv(name, header, data.tolist())

    def plot(self, name, series, **kw):
        self.manifest.files.append(line_plot(self.path(name), series, **kw))

    def check(self, name, value, tol, le=True):
        passed = bool(value <= tol) if le else bool(value >= tol)
        self.checks.append({"name": name, "value": float(value), "tol": float(tol), "passed": passed})
        return passed


def _uniform_grid(t_span, n):
    return np.linspace(t_span[0], t_span[1], n)


def _x0(run: _Run, key="x0"):
    sc = run.sc
    if key in sc.raw:
        x0 = np.asarray(sc.raw[key], dtype=float)
    elif sc.bundle is not None and sc.bundle.name in _DEFAULT_X0:
        x0 = np.asarray(_DEFAULT_X0[sc.bundle.name])
    else:
        raise ConfigError(key, "required for inline systems")
    if x0.shape != (sc.system.n,):
        raise ConfigError(key, f"expected {sc.system.n} entries, got {x0.size}")
    if not sc.system.in_domain(x0):
        raise ConfigError(key, f"{x0.tolist()} outside the state domain")
    return x0


def _z0(run: _Run, nf):
    sc = run.sc
    if "z0" in sc.raw:
        z0 = np.asarray(sc.raw["z0"], dtype=float)
    elif sc.bundle.name == "circadian":
        z0 = circadian_transmissible_input(sc.bundle.params).z0
    else:
        z0 = np.asarray(_DEFAULT_Z0[(sc.bundle.name, sc.extras["normal_form_name"])])
    if z0.shape != (nf.m,):
        raise ConfigError("z0", f"expected {nf.m} entries, got {z0.size}")
    return z0


def _x_box(run: _Run):
    sc = run.sc
    if "x_box" in sc.extras:
        return sc.extras["x_box"]
    if sc.extras.get("flat"):
        return list(sc.bundle.z_box) + [(-2.0, 2.0)]
    if sc.bundle is not None and sc.bundle.x_box is not None:
        return sc.bundle.x_box
    return [(0.1, 10.0) if lo >= 0 else (-2.0, 2.0) for lo, _ in sc.system.state_domain]


def _u_box(run: _Run):
    sc = run.sc
    if "u_box" in sc.extras:
        return sc.extras["u_box"]
    if sc.bundle is not None:
        return sc.bundle.u_box
    return (0.05, 5.0) if sc.group.domain[0] >= 0 else (-2.0, 2.0)


def _signal(run: _Run, default):
    return run.sc.extras.get("signal", default)


def _t_span(run: _Run, default):
    return tuple(float(v) for v in run.sc.raw.get("t_span", default))


# --- scenario kinds ---------------------------------------------------------------------------

def _simulate(run: _Run):
    sc = run.sc
    u = _signal(run, constant(1.0, sc.group.domain))
    t_span = _t_span(run, (0.0, 20.0))
    tr = simulate(sc.system, _x0(run), u, t_span, rtol=run.rtol, atol=run.atol)
    if "n_grid" in sc.raw:
        tr = tr.resample(_uniform_grid(t_span, sc.raw["n_grid"]))
    run.trajectory_csv("trajectory.csv", tr, u)
    run.plot("trajectory.svg", [("y", tr.t, tr.y)], title=sc.system.label, ylabel="y")
    run.info.update(n_points=len(tr), final_state=tr.x[-1].tolist(), final_output=float(tr.y[-1]))


def _simulate_normal_form(run: _Run):
    sc = run.sc
    nf = sc.extras["normal_form"]
    u = _signal(run, constant(1.0, nf.group.domain))
    t_span = _t_span(run, (0.0, 50.0))
    tr = simulate_normal_form(nf, _z0(run, nf), sc.number("p_hat0", 0.0),
                              u, t_span, rtol=run.rtol, atol=run.atol)
    if "n_grid" in sc.raw:
        tr = tr.resample(_uniform_grid(t_span, sc.raw["n_grid"]))
    run.trajectory_csv("trajectory.csv", tr, u)
    run.plot("trajectory.svg", [("y", tr.t, tr.y), ("p_hat", tr.t, tr["p_hat"]), ("e", tr.t, tr["e"])],
             title=nf.label)
    run.info.update(n_points=len(tr), final_state=tr.x[-1].tolist(), final_p_hat=float(tr["p_hat"][-1]),
                    final_error=float(tr["e"][-1]))


def _check_equivariance(run: _Run):
    sc = run.sc
    tol = sc.positive("tol", 1e-8)
    report = equivariance_sweep(sc.system, sc.group, sc.family, _x_box(run), _u_box(run),
                                p_range=sc.extras.get("p_range", (-2.0, 2.0)),
                                n_samples=sc.count("n_samples", 100), seed=int(sc.raw.get("seed", 0)), tol=tol)
    run.dict_csv("equivariance.csv", report.csv_rows())
    run.check("max_normalized_residual", report.max_residual, tol)
    run.info["worst_sample"] = report.worst


def _check_pde(run: _Run):
    sc = run.sc
    tol = sc.positive("tol", 1e-6)
    names = [sc.extras["normal_form_name"]] if "normal_form" in sc.raw else sorted(sc.bundle.deltas)
    rng = np.random.default_rng(int(sc.raw.get("seed", 0)))
    xs = sample_box(_x_box(run), sc.count("n_samples", 100), rng)
    rows = []
    for name in names:
        delta = sc.bundle.deltas[name][0]
        worst, margin = 0.0, np.inf
        for x in xs:
            res_z, res_p = pde_residuals(sc.family, lambda v: delta(v)[:-1], lambda v: delta(v)[-1], x)
            err = max(float(np.max(np.abs(res_z))), abs(res_p))
            m = independence_margin(lambda v: delta(v)[:-1], lambda v: delta(v)[-1], x)
            worst, margin = max(worst, err), min(margin, m)
            row = {"normal_form": name, **{f"x{i + 1}": v for i, v in enumerate(x)}}
            row.update({f"E_delta_z{i + 1}": v for i, v in enumerate(res_z)})
            row.update(E_delta_p_minus_1=res_p, independence_margin=m)
            rows.append(row)
        run.check(f"{name}: max PDE residual", worst, tol)
        run.check(f"{name}: min independence margin", margin, 1e-8, le=False)
    run.dict_csv("pde.csv", rows)


def _ti_rows(tis):
    rows = []
    for ti in tis:
        row = {"u_hat": ti.u_value, **{f"z{i + 1}": v for i, v in enumerate(ti.z_star)}}
        row.update(classification=ti.classification, residual=ti.residual, n_equilibria=len(ti.equilibria))
        for k, lam in enumerate(ti.eigenvalues):
            row[f"eig{k + 1}_re"] = float(np.real(lam))
            row[f"eig{k + 1}_im"] = float(np.imag(lam))
        rows.append(row)
    return rows


def _ti_counts(tis):
    counts = {c: sum(ti.classification == c for ti in tis) for c in ("stable", "unstable", "marginal")}
    text = ", ".join(f"{n} {c}" for c, n in counts.items() if n or c != "marginal")
    return counts, text


def _search_box(run: _Run, nf_name):
    sc = run.sc
    if "search_box" in sc.extras:
        return sc.extras["search_box"]
    return sc.bundle.transmissible_box[nf_name]


def _transmissible(run: _Run):
    sc = run.sc
    nf = sc.extras["normal_form"]
    tis = find_constant_transmissible(nf, _search_box(run, sc.extras["normal_form_name"]),
                                      n_starts=sc.count("n_starts", 128))
    run.dict_csv("transmissible.csv", _ti_rows(tis))
    counts, text = _ti_counts(tis)
    run.info.update(n_transmissible=len(tis), counts=counts, classification=text,
                    u_values=[ti.u_value for ti in tis])
    if not tis:
        run.check("transmissible inputs found", 0, 1, le=False)


def _gauge(run: _Run):
    sc = run.sc
    nf = sc.extras["normal_form"]
    tau, grad = sc.extras["tau"]
    gauged = gauge_transform(nf, tau, grad)
    tis = find_constant_transmissible(gauged, _search_box(run, sc.extras["normal_form_name"]),
                                      n_starts=sc.count("n_starts", 128))
    run.dict_csv("transmissible.csv", _ti_rows(tis))
    counts, text = _ti_counts(tis)
    run.info.update(n_transmissible=len(tis), counts=counts, classification=text,
                    u_values=[ti.u_value for ti in tis])
    if "compare_to" in sc.raw:
        target = sc.bundle.normal_forms[sc.raw["compare_to"]]
        rng = np.random.default_rng(int(sc.raw.get("seed", 0)))
        n = sc.count("n_samples", 100)
        zs = sample_box(sc.bundle.z_box, n, rng)
        us = sample_box([sc.bundle.u_box], n, rng)[:, 0]
        rows, worst = [], 0.0
        for z, u in zip(zs, us):
            diff = gauged.variable_part(z, u) - target.variable_part(z, u)
            dy = gauged.h_z(z) - target.h_z(z)
            err = max(float(np.max(np.abs(diff))), abs(dy))
            worst = max(worst, err)
            rows.append({**{f"z{i + 1}": v for i, v in enumerate(z)}, "u_hat": u, "max_abs_difference": err})
        run.dict_csv("gauge_comparison.csv", rows)
        run.check(f"vector field difference to {sc.raw['compare_to']}", worst, sc.positive("tol", 1e-10))


def _rectify(run: _Run):
    sc = run.sc
    tol = sc.positive("tol", 1e-6)
    if "points" in sc.raw:
        pts = np.atleast_2d(np.asarray(sc.raw["points"], dtype=float))
        if pts.shape[1] != sc.system.n:
            raise ConfigError("points", f"expected points with {sc.system.n} coordinates")
    else:
        rng = np.random.default_rng(int(sc.raw.get("seed", 0)))
        pts = sample_box(_x_box(run), sc.count("n_samples", 20), rng)
    reference = sc.bundle.delta if sc.bundle is not None and "cross_section" not in sc.raw else None
    rows, worst = [], 0.0
    for x in pts:
        z, p_hat = rectify_group_action(sc.family, sc.extras["cross_section"], x)
        row = {**{f"x{i + 1}": v for i, v in enumerate(x)}, **{f"z{i + 1}": v for i, v in enumerate(z)},
               "p_hat": p_hat}
        if reference is not None:
            ref = reference(x)
            err = float(np.max(np.abs(np.append(z, p_hat) - ref)))
            worst = max(worst, err)
            row.update({f"z{i + 1}_ref": v for i, v in enumerate(ref[:-1])})
            row.update(p_hat_ref=ref[-1], abs_error=err)
        rows.append(row)
    run.dict_csv("rectify.csv", rows)
    if reference is not None:
        run.check("max deviation from analytic transformation", worst, tol)


def _equilibrate(system, x_init, u_value, domain, rtol, atol, horizon=400.0):
    tr = simulate(system, x_init, constant(u_value, domain), (0.0, horizon), rtol=rtol, atol=atol)
    x = tr.x[-1]
    return x, float(np.max(np.abs(system.rhs(x, u_value))))


def _reproduce_fig1(run: _Run):
    sc = run.sc
    system, group = sc.system, sc.group
    default = piecewise([(0.0, constant(0.5)), (5.0, constant(1.0)), (15.0, constant(0.25))], group.domain)
    u = _signal(run, default)
    scale = sc.positive("scale", 2.0)
    p = float(np.log(scale)) if group.domain[0] >= 0 else scale
    t_span = _t_span(run, (0.0, 30.0))
    x0, res = _equilibrate(system, _x0(run), u(t_span[0]), group.domain, run.rtol, run.atol)
    x0_scaled = sc.family(p, x0)
    u_scaled = transform_signal(group, p, u)
    grid = _uniform_grid(t_span, sc.count("n_grid", 1001))
    tr1 = simulate(system, x0, u, t_span, rtol=run.rtol, atol=run.atol).resample(grid)
    tr2 = simulate(system, x0_scaled, u_scaled, t_span, rtol=run.rtol, atol=run.atol).resample(grid)
    run.trajectory_csv("fig1_u.csv", tr1, u)
    run.trajectory_csv("fig1_scaled.csv", tr2, u_scaled)
    run.plot("fig1_input.svg", [("u", grid, u.values(grid)), (f"{scale:g} u", grid, u_scaled.values(grid))],
             title="inputs", ylabel="u")
    run.plot("fig1_output.svg", [("y (u)", grid, tr1.y), (f"y ({scale:g} u)", grid, tr2.y)],
             title="outputs", ylabel="y")
    run.info.update(equilibrium_residual=res, x0=x0.tolist(), x0_scaled=x0_scaled.tolist(), p=p)
    run.check("max |y(u) - y(scaled u)|", float(np.max(np.abs(tr1.y - tr2.y))), sc.positive("tol", 1e-6))


def _intersections(fun, lo, hi, n):
    """Roots of a scalar function by sign changes on a fine grid, refined with Brent's method."""
    xs = np.linspace(lo, hi, n)
    vs = np.array([fun(x) for x in xs])
    roots = []
    for k in range(n - 1):
        if vs[k] == 0.0:
            roots.append(float(xs[k]))
        elif vs[k] * vs[k + 1] < 0:
            roots.append(float(brentq(fun, xs[k], xs[k + 1], xtol=1e-14, rtol=1e-14)))
    return roots


def _reproduce_fig3(run: _Run):
    sc = run.sc
    params = sc.bundle.params
    n = sc.count("n_grid", 2001)
    z1 = np.linspace(0.05, 6.0, n)
    series = []
    # first normal form: its single transmissible input, nullclines of the z-subsystem
    nf7 = sc.bundle.normal_forms["nf"]
    u7 = params.k2 / params.v2
    g1, g2 = bistable_nullclines(params, u7, "nf")
    crossings = _intersections(lambda s: g1(s) - g2(s), z1[0], z1[-1], n)
    kinds = []
    for s in crossings:
        zc = np.array([s, g2(s)])
        eig = np.linalg.eigvals(fd_jacobian(lambda z: nf7.f_z(z, u7), zc))
        kinds.append("stable" if np.all(eig.real < 0) else "saddle" if np.any(eig.real < 0) else "unstable")
    run.csv("nullclines_nf.csv", ["z1", "z2_dz1_zero", "z2_dz2_zero"],
            np.column_stack([z1, g1(z1), g2(z1)]).tolist())
    run.dict_csv("intersections_nf.csv", [{"u_hat": u7, "z1": s, "z2": g2(s), "type": k}
                                          for s, k in zip(crossings, kinds)])
    series.append(("dz1 = 0", z1, g1(z1)))
    series.append(("dz2 = 0", z1, g2(z1)))
    run.plot("nullclines_nf.svg", series, title="first normal form", xlabel="z1", ylabel="z2")

    # second normal form: one dz1 nullcline per transmissible input
    nf8 = sc.bundle.normal_forms["nf2"]
    tis = find_constant_transmissible(nf8, sc.bundle.transmissible_box["nf2"], n_starts=sc.count("n_starts", 128))
    cols, series = [z1, bistable_nullclines(params, 1.0, "nf2")[1](z1)], []
    header = ["z1", "z2_dz2_zero"]
    for k, ti in enumerate(tis):
        h1 = bistable_nullclines(params, ti.u_value, "nf2")[0]
        cols.append(h1(z1))
        header.append(f"z2_dz1_zero_u{k + 1}")
        series.append((f"dz1 = 0 (u_hat = {ti.u_value:.4f})", z1, h1(z1)))
    series.append(("dz2 = 0", z1, cols[1]))
    run.csv("nullclines_nf2.csv", header, np.column_stack(cols).tolist())
    run.dict_csv("transmissible_nf2.csv", _ti_rows(tis))
    run.plot("nullclines_nf2.svg", series, title="second normal form", xlabel="z1", ylabel="z2")

    counts, text = _ti_counts(tis)
    run.info.update(nf_intersections=len(crossings), nf_intersection_types=kinds,
                    nf2_transmissible=len(tis), nf2_classification=text)
    ok7 = len(crossings) == 3 and sorted(kinds) == ["saddle", "stable", "stable"]
    ok8 = len(tis) == 3 and counts["stable"] == 2 and counts["unstable"] == 1
    run.check("first normal form bistable (3 intersections, 2 stable + saddle)", float(ok7), 1.0, le=False)
    run.check("second normal form: 2 stable, 1 unstable", float(ok8), 1.0, le=False)


def _reproduce_fig4(run: _Run):
    sc = run.sc
    nf = sc.extras.get("normal_form", sc.bundle.nf)
    params = sc.bundle.params
    pti = circadian_transmissible_input(params)
    mode = sc.raw.get("input", "day-night")
    if mode == "transmissible":
        u, period = pti.signal, pti.period
    else:
        u = day_night_input(sc.number("mean", 0.3), sc.number("relative_amplitude", 1.0))
        period = 24.0
    scale = sc.positive("scale", 2.0)
    periods = sc.count("periods", 25 if mode == "transmissible" else 30)
    z0 = _z0(run, nf)
    t_end = periods * period
    u2 = transform_signal(nf.group, float(np.log(scale)), u)
    tr1 = simulate_normal_form(nf, z0, 0.0, u, (0.0, t_end), rtol=run.rtol, atol=run.atol)
    tr2 = simulate_normal_form(nf, z0, 0.0, u2, (0.0, t_end), rtol=run.rtol, atol=run.atol)
    grid = np.linspace(0.0, t_end, 96 * periods + 1)
    tr1, tr2 = tr1.resample(grid), tr2.resample(grid)
    run.trajectory_csv("fig4_u.csv", tr1, u)
    run.trajectory_csv("fig4_scaled.csv", tr2, u2)
    late = grid >= t_end - 3 * period
    dp = tr2["p_hat"] - tr1["p_hat"]
    mean_dp = float(np.mean(dp[late]))
    dzcm = float(np.max(np.abs(tr2["zCm"][late] - tr1["zCm"][late])))
    run.plot("fig4_input.svg", [("u", grid, u.values(grid)), (f"{scale:g} u", grid, u2.values(grid))],
             title="light input", xlabel="t (h)", ylabel="u")
    run.plot("fig4_p_hat.svg", [("p_hat (u)", grid, tr1["p_hat"]), (f"p_hat ({scale:g} u)", grid, tr2["p_hat"])],
             title="adaptation estimate", xlabel="t (h)", ylabel="p_hat")
    run.plot("fig4_zCm.svg", [("zCm (u)", grid, tr1["zCm"]), (f"zCm ({scale:g} u)", grid, tr2["zCm"])],
             title="mRNA", xlabel="t (h)", ylabel="zCm")
    tol = sc.positive("tol", 1e-2)
    run.info.update(input=mode, period=period, periods=periods, late_mean_p_hat_difference=mean_dp,
                    late_p_hat_1_max=float(np.max(np.abs(tr1["p_hat"][late]))))
    run.check("|late mean p_hat difference - log(scale)|", abs(mean_dp - np.log(scale)), tol)
    run.check("late max |zCm(u) - zCm(scaled u)|", dzcm, tol)


_HANDLERS = {
    "simulate": _simulate,
    "simulate-normal-form": _simulate_normal_form,
    "check-equivariance": _check_equivariance,
    "check-pde": _check_pde,
    "transmissible": _transmissible,
    "gauge": _gauge,
    "rectify": _rectify,
    "reproduce-fig1": _reproduce_fig1,
    "reproduce-fig3": _reproduce_fig3,
    "reproduce-fig4": _reproduce_fig4,
}


def output_dir_for(sc: Scenario, out=None):
    """``--out`` beats the config's ``output_dir``, which beats ``$SCALEINV_OUTPUT_DIR/<name>``."""
    if out:
        return out
    if "output_dir" in sc.raw:
        return str(sc.raw["output_dir"])
    return os.path.join(os.environ.get(ENV_OUTPUT_DIR) or DEFAULT_OUTPUT_DIR, sc.name)


def run_scenario(sc: Scenario, out_dir, rtol=None, atol=None) -> Manifest:
    """Execute a resolved scenario, write its artifacts and ``summary.json``.

    Numerical failures propagate as exceptions; check failures only set the
    verdict to ``FAIL``.
    """
    rtol = rtol if rtol is not None else float(sc.raw.get("rtol", DEFAULT_RTOL))
    atol = atol if atol is not None else float(sc.raw.get("atol", DEFAULT_ATOL))
    run = _Run(sc, out_dir, rtol, atol)
    start = time.perf_counter()
    _HANDLERS[sc.kind](run)
    verdict = "PASS" if all(c["passed"] for c in run.checks) else "FAIL"
    summary = {"scenario": sc.name, "kind": sc.kind, "verdict": verdict, "checks": run.checks,
               "rtol": rtol, "atol": atol, **run.info}
    if sc.bundle is not None:
        summary["example"] = sc.bundle.name
    summary["files"] = [os.path.basename(f) for f in run.manifest.files] + ["summary.json"]
    run.manifest.files.append(write_json(run.path("summary.json"), summary))
    summary["elapsed_seconds"] = time.perf_counter() - start
    run.manifest.summary = summary
    return run.manifest


def _failure_summary(out_dir, sc, message, t_last=None):
    summary = {"scenario": sc.name, "kind": sc.kind, "verdict": "ERROR", "error": message}
    if t_last is not None:
        summary["last_reached_time"] = t_last
    try:
        write_json(os.path.join(out_dir, "summary.json"), summary)
    except OSError:
        pass


def _cmd_run(args):
    try:
        raw = load(args.config)
        sc = resolve(raw, name=os.path.splitext(os.path.basename(args.config))[0])
        for flag in ("rtol", "atol"):
            value = getattr(args, flag)
            if value is not None and not value > 0:
                raise ConfigError(f"--{flag}", f"must be positive, got {value}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    out_dir = output_dir_for(sc, args.out)
    try:
        manifest = run_scenario(sc, out_dir, args.rtol, args.atol)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except SimulationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        _failure_summary(out_dir, sc, str(exc), exc.t_last)
        return 1
    except (DomainError, NormalFormError, RectificationError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        _failure_summary(out_dir, sc, str(exc))
        return 1
    s = manifest.summary
    print(f"{s['scenario']} ({s['kind']}): {s['verdict']}")
    for c in s["checks"]:
        print(f"  [{'ok' if c['passed'] else 'FAIL'}] {c['name']}: {c['value']:.3e} (tol {c['tol']:.1e})")
    if s.get("worst_sample") and not manifest.passed:
        w = s["worst_sample"]
        print(f"  worst sample: x={w['x']} u={w['u']:.6g} p={w['p']:.6g} residual={w['normalized']:.3e}")
    if "classification" in s:
        print(f"  transmissible inputs: {s['classification']}")
    for f in manifest.files:
        print(f"  wrote {f}")
    return 0 if manifest.passed else 1


def _cmd_validate(args):
    try:
        sc = resolve(load(args.config), name=os.path.splitext(os.path.basename(args.config))[0])
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    print(f"ok: {sc.name} ({sc.kind})")
    return 0


def _cmd_list_examples(args):
    for name, (factory, params_cls) in BUNDLES.items():
        bundle = factory(params_cls())
        forms = ", ".join(f"{k} (m={nf.m})" for k, nf in bundle.normal_forms.items())
        original = "yes" if bundle.original is not None else "no"
        print(f"{name}: normal forms {forms}; original system: {original}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="scaleinv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run a scenario config")
    p.add_argument("config")
    p.add_argument("--out", help=f"output directory (default ${ENV_OUTPUT_DIR}/<name>)")
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)
    p.set_defaults(func=_cmd_run)
    p = sub.add_parser("validate", help="check a scenario config without running it")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)
    p = sub.add_parser("list-examples", help="list the built-in example systems")
    p.set_defaults(func=_cmd_list_examples)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, matching the configuration-error code
        return exc.code if isinstance(exc.code, int) else 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
