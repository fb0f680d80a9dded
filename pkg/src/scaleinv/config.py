"""Scenario configuration: JSON loading, validation and reference resolution.

Signals, inline systems and expression fields are described as tagged JSON
records; see the README for the schema.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
import sympy as sp

from . import signals
from .dynamics import DynamicalSystem
from .examples import BUNDLES, get_bundle
from .groups import BUILTIN_GROUPS, StateTransformationFamily, get_group, scaling_family, translation_family
from .normalform import CrossSection, as_flat_system

KINDS = (
    "simulate", "simulate-normal-form", "check-equivariance", "check-pde", "transmissible",
    "gauge", "rectify", "reproduce-fig1", "reproduce-fig3", "reproduce-fig4",
)

# which kinds need a bundle/system, and which keys each kind accepts beyond the common ones
_COMMON = {"kind", "name", "output_dir", "rtol", "atol", "seed", "example", "params", "description"}
_KEYS = {
    "simulate": {"system", "signal", "x0", "t_span", "n_grid"},
    "simulate-normal-form": {"normal_form", "signal", "z0", "p_hat0", "t_span", "n_grid"},
    "check-equivariance": {"system", "normal_form", "n_samples", "tol", "x_box", "u_box", "p_range"},
    "check-pde": {"normal_form", "n_samples", "tol", "x_box"},
    "transmissible": {"normal_form", "n_starts", "search_box"},
    "gauge": {"normal_form", "tau", "compare_to", "n_samples", "tol", "n_starts", "search_box"},
    "rectify": {"points", "n_samples", "cross_section", "tol", "x_box"},
    "reproduce-fig1": {"signal", "scale", "x0", "t_span", "tol", "n_grid"},
    "reproduce-fig3": {"n_grid", "n_starts"},
    "reproduce-fig4": {"input", "scale", "periods", "tol", "mean", "relative_amplitude"},
}


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class Scenario:
    kind: str
    raw: dict
    name: str = "scenario"
    bundle: Any = None
    system: Optional[DynamicalSystem] = None
    family: Optional[StateTransformationFamily] = None
    group: Any = None
    extras: dict = field(default_factory=dict)

    def get(self, key, default=None):
        return self.raw.get(key, default)

    def number(self, key, default):
        value = self.raw.get(key, default)
        if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
            raise ConfigError(key, f"expected a number, got {value!r}")
        return float(value)

    def positive(self, key, default):
        value = self.number(key, default)
        if value <= 0:
            raise ConfigError(key, f"must be positive, got {value}")
        return value

    def count(self, key, default):
        value = self.raw.get(key, default)
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise ConfigError(key, f"expected a positive integer, got {value!r}")
        return value


def load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None
    return raw


def _bounds(value, key):
    """JSON interval list with ``null`` for infinite bounds."""
    try:
        out = []
        for lo, hi in value:
            out.append((-np.inf if lo is None else float(lo), np.inf if hi is None else float(hi)))
        return out
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected a list of [lo, hi] pairs, got {value!r}") from None


def compile_expressions(exprs, names, key, params=None, extra=()):
    """Compile expression strings into one numpy callable ``fn(vector, *extra)``.

    ``names`` are bound to the vector components, ``extra`` to further scalar
    arguments; ``params`` are substituted as constants.
    """
    params = params or {}
    symbols = {n: sp.Symbol(n) for n in list(names) + list(extra)}
    local = dict(symbols)
    local.update({k: sp.Float(v) if isinstance(v, float) else sp.Integer(v) if isinstance(v, int) else v
                  for k, v in params.items()})
    single = isinstance(exprs, str)
    items = [exprs] if single else list(exprs)
    try:
        parsed = [sp.sympify(e, locals=local) for e in items]
    except (sp.SympifyError, TypeError, SyntaxError) as exc:
        raise ConfigError(key, f"cannot parse expression: {exc}") from None
    allowed = set(symbols.values())
    for e in parsed:
        free = e.free_symbols - allowed
        if free:
            raise ConfigError(key, f"unknown symbol(s) {sorted(map(str, free))}")
    vec = [symbols[n] for n in names]
    ext = [symbols[n] for n in extra]
    fn = sp.lambdify([vec, *ext], parsed, modules="numpy")

    def call(x, *args):
        out = np.asarray(fn(list(np.asarray(x, dtype=float)), *args), dtype=float)
        return float(out[0]) if single else out

    return call


def parse_signal(record, key="signal", domain=(-np.inf, np.inf)):
    """Build an :class:`InputSignal` from its tagged JSON record."""
    if not isinstance(record, dict) or "type" not in record:
        raise ConfigError(key, "signal must be an object with a 'type' field")
    kind = record["type"]
    try:
        if kind == "constant":
            return signals.constant(record["value"], domain)
        if kind == "sinusoid":
            return signals.sinusoid(record.get("offset", 0.0), record.get("amplitude", 1.0),
                                    record.get("omega", 1.0), record.get("phase", 0.0), domain)
        if kind == "ramp":
            return signals.ramp(record.get("offset", 0.0), record.get("slope", 1.0), domain)
        if kind == "table":
            return signals.table(record["times"], record["values"], record.get("interpolation", "linear"),
                                 record.get("period"), domain)
        if kind == "transformed":
            group = get_group(record["group"])
            inner = parse_signal(record["signal"], f"{key}.signal", domain)
            return signals.transform_signal(group, float(record["p"]), inner)
        if kind == "piecewise":
            segs = []
            for i, seg in enumerate(record["segments"]):
                part = parse_signal(seg["signal"], f"{key}.segments[{i}].signal", domain)
                segs.append((float(seg["t_start"]), part))
            return signals.piecewise(segs, domain)
    except KeyError as exc:
        raise ConfigError(key, f"missing field {exc.args[0]!r} for signal type {kind!r}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(key, str(exc)) from None
    raise ConfigError(f"{key}.type", f"unknown signal type {kind!r}")


def parse_inline_system(record, key="system"):
    """Inline system record: ``states``, ``f``, ``h``, optional ``parameters``,
    ``domain``, ``group`` and ``family``."""
    if not isinstance(record, dict):
        raise ConfigError(key, "inline system must be an object")
    for req in ("states", "f", "h"):
        if req not in record:
            raise ConfigError(f"{key}.{req}", "missing")
    names = list(record["states"])
    input_name = record.get("input", "u")
    params = record.get("parameters", {})
    if len(record["f"]) != len(names):
        raise ConfigError(f"{key}.f", f"expected {len(names)} expressions")
    f = compile_expressions(record["f"], names, f"{key}.f", params, extra=(input_name,))
    h = compile_expressions(record["h"], names, f"{key}.h", params)
    domain = _bounds(record["domain"], f"{key}.domain") if "domain" in record else None
    system = DynamicalSystem(len(names), f, h, domain, label=record.get("label", "inline"), state_names=names)
    group_name = record.get("group", "scaling")
    if group_name not in BUILTIN_GROUPS:
        raise ConfigError(f"{key}.group", f"unknown group {group_name!r}")
    family = None
    if "family" in record:
        fam = record["family"]
        if "rho" in fam:
            rho = compile_expressions(fam["rho"], names, f"{key}.family.rho", params, extra=("p",))
            family = StateTransformationFamily(apply=lambda p, x: rho(x, p), n=len(names), label="inline")
        elif "scaling_weights" in fam:
            family = scaling_family(fam["scaling_weights"])
        elif "translation_weights" in fam:
            family = translation_family(fam["translation_weights"])
        else:
            raise ConfigError(f"{key}.family", "expected 'rho', 'scaling_weights' or 'translation_weights'")
    return system, get_group(group_name), family


def parse_cross_section(record, names, key="cross_section"):
    if not isinstance(record, dict) or "anchor" not in record or "chart" not in record:
        raise ConfigError(key, "expected an object with 'anchor' and 'chart' expressions")
    anchor = compile_expressions(record["anchor"], names, f"{key}.anchor")
    chart = compile_expressions(list(record["chart"]), names, f"{key}.chart")
    return CrossSection(anchor=anchor, chart=chart)


def resolve(raw, name="scenario") -> Scenario:
    """Validate a raw config dict and resolve its references.

    Raises
    ------
    ConfigError
        Naming the first bad key.
    """
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a JSON object")
    kind = raw.get("kind")
    if kind not in KINDS:
        raise ConfigError("kind", f"expected one of {list(KINDS)}, got {kind!r}")
    unknown = set(raw) - _COMMON - _KEYS[kind]
    if unknown:
        raise ConfigError(sorted(unknown)[0], f"unknown key for kind {kind!r}")
    sc = Scenario(kind=kind, raw=raw, name=str(raw.get("name", name)))
    for key in ("rtol", "atol"):
        if key in raw:
            sc.positive(key, None)

    if "system" in raw:
        if "example" in raw:
            raise ConfigError("system", "give either 'example' or an inline 'system', not both")
        sc.system, sc.group, sc.family = parse_inline_system(raw["system"])
    else:
        default = {"reproduce-fig3": "bistable", "reproduce-fig4": "circadian"}.get(kind, "feedforward")
        example = raw.get("example", default)
        if example not in BUNDLES:
            raise ConfigError("example", f"unknown example {example!r}; available: {sorted(BUNDLES)}")
        try:
            sc.bundle = get_bundle(example, **raw.get("params", {}))
        except TypeError as exc:
            raise ConfigError("params", str(exc)) from None
        except ValueError as exc:
            raise ConfigError("params", str(exc)) from None
        sc.system, sc.group, sc.family = sc.bundle.original, sc.bundle.group, sc.bundle.family

    nf_name = raw.get("normal_form", "nf")
    flat = kind == "check-equivariance" and sc.bundle is not None and (
        "normal_form" in raw or sc.bundle.original is None)
    if "normal_form" in raw or flat or kind in ("simulate-normal-form", "transmissible", "gauge"):
        if sc.bundle is None or nf_name not in sc.bundle.normal_forms:
            avail = [] if sc.bundle is None else sorted(sc.bundle.normal_forms)
            raise ConfigError("normal_form", f"unknown normal form {nf_name!r}; available: {avail}")
        sc.extras["normal_form"] = sc.bundle.normal_forms[nf_name]
        sc.extras["normal_form_name"] = nf_name

    if flat:
        # normal forms are checked as flat systems with the canonical shift family
        sc.system, sc.family = as_flat_system(sc.extras["normal_form"])
        sc.extras["flat"] = True
    if kind == "check-pde":
        if sc.bundle is None or not sc.bundle.deltas:
            raise ConfigError("example", "check-pde needs an example with analytic transformations")
        if "normal_form" in raw and nf_name not in sc.bundle.deltas:
            raise ConfigError("normal_form", f"no analytic transformation for {nf_name!r}")
    needs_original = kind in ("simulate", "check-equivariance", "rectify", "reproduce-fig1", "check-pde")
    if needs_original and sc.system is None:
        raise ConfigError("example", f"example {sc.bundle.name!r} has no original-coordinate system")
    if kind in ("check-equivariance", "rectify", "reproduce-fig1", "check-pde") and sc.family is None:
        raise ConfigError("system.family", "a state-transformation family is required")
    if kind == "reproduce-fig3" and sc.bundle.name != "bistable":
        raise ConfigError("example", "reproduce-fig3 needs the 'bistable' example")
    if kind == "reproduce-fig4" and sc.bundle.name != "circadian":
        raise ConfigError("example", "reproduce-fig4 needs the 'circadian' example")
    if kind == "reproduce-fig4" and raw.get("input", "day-night") not in ("transmissible", "day-night"):
        raise ConfigError("input", "expected 'transmissible' or 'day-night'")

    if "signal" in raw:
        sc.extras["signal"] = parse_signal(raw["signal"], "signal", sc.group.domain)
    if "t_span" in raw:
        ts = raw["t_span"]
        if not (isinstance(ts, list) and len(ts) == 2 and all(isinstance(v, (int, float)) for v in ts)
                and ts[1] > ts[0] >= 0):
            raise ConfigError("t_span", f"expected [t0, t1] with 0 <= t0 < t1, got {ts!r}")
    if kind == "rectify":
        if "cross_section" in raw:
            sc.extras["cross_section"] = parse_cross_section(raw["cross_section"], sc.system.state_names)
        elif sc.bundle is not None and sc.bundle.cross_section is not None:
            sc.extras["cross_section"] = sc.bundle.cross_section
        else:
            raise ConfigError("cross_section", "required for inline systems")
    if kind == "gauge":
        tau = raw.get("tau")
        nf = sc.extras["normal_form"]
        if isinstance(tau, (int, float)) and not isinstance(tau, bool):
            sc.extras["tau"] = (lambda z, c=float(tau): c, lambda z: np.zeros(nf.m))
        elif isinstance(tau, str):
            fn = compile_expressions(tau, nf.z_names, "tau")
            # exact gradient: the gauge identity is checked far below finite-difference accuracy
            expr = sp.sympify(tau, locals={n: sp.Symbol(n) for n in nf.z_names})
            grad = [str(sp.diff(expr, sp.Symbol(n))) for n in nf.z_names]
            sc.extras["tau"] = (fn, compile_expressions(grad, nf.z_names, "tau"))
        else:
            raise ConfigError("tau", "expected a number or an expression in the z variables")
        if "compare_to" in raw and raw["compare_to"] not in sc.bundle.normal_forms:
            raise ConfigError("compare_to", f"unknown normal form {raw['compare_to']!r}")
    for key in ("x_box", "search_box"):
        if key in raw:
            sc.extras[key] = _bounds(raw[key], key)
    for key in ("u_box", "p_range"):
        if key in raw:
            sc.extras[key] = _bounds([raw[key]], key)[0]
    for key in ("x0", "z0", "points"):
        if key in raw:
            try:
                arr = np.asarray(raw[key], dtype=float)
            except (TypeError, ValueError):
                raise ConfigError(key, "expected numbers") from None
            if not np.all(np.isfinite(arr)):
                raise ConfigError(key, "entries must be finite")
    for key in ("n_samples", "n_starts", "n_grid", "periods"):
        if key in raw:
            sc.count(key, None)
    for key in ("tol", "scale"):
        if key in raw:
            sc.positive(key, None)
    return sc
