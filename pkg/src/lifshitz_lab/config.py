"""Run configuration: INI text with flat sections.

A run file looks like::

    [run]
    subcommand = energy
    mode = Standard

    [model]
    kind = plasma
    wp_eV = 9.0

    [geometry]
    a_nm = 500
    T_K = 300

Every key is declared in :data:`SCHEMA`; unknown sections or keys are
reported together with the closest valid name.  Lists are comma separated.
:func:`parse_config` collects every problem before raising, and
:func:`serialize_config` writes the fully resolved configuration back in the
same format so that ``parse(serialize(cfg)) == cfg``.
"""

from __future__ import annotations

import configparser
import difflib
import math
import os
from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import ValidationError

SUBCOMMANDS = ("energy", "pressure", "entropy-scan", "nernst", "classical", "compare")
MODEL_KINDS = ("plasma", "drude", "oscillator", "dc-insulator", "tabulated", "perfect")
MODES = ("Standard", "ModifiedL0")


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text):
    vals = tuple(float(v) for v in text.split(",") if v.strip())
    if not vals:
        raise ValueError("empty list")
    return vals


def _pairs(text):
    """``lo:hi; lo:hi`` ranges."""
    out = []
    for chunk in text.split(";"):
        if chunk.strip():
            lo, hi = chunk.split(":")
            out.append((float(lo), float(hi)))
    if not out:
        raise ValueError("empty range list")
    return tuple(out)


def _triples(text):
    """``g_eV2:omega_eV[:gamma_eV]; ...`` oscillator terms."""
    out = []
    for chunk in text.split(";"):
        if chunk.strip():
            parts = [float(p) for p in chunk.split(":")]
            if len(parts) == 2:
                parts.append(0.0)
            if len(parts) != 3:
                raise ValueError(f"oscillator term needs 2 or 3 fields: {chunk!r}")
            out.append(tuple(parts))
    if not out:
        raise ValueError("empty oscillator list")
    return tuple(out)


def _choice(options):
    def conv(text):
        t = text.strip()
        if t not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return t

    return conv


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return "; ".join(":".join(repr(v) for v in row) for row in value)
        return ", ".join(repr(v) for v in value)
    return str(value)


@dataclass(frozen=True)
class Key:
    conv: Callable[[str], Any]
    default: Any = None
    doc: str = ""


_MODEL_KEYS = {
    "kind": Key(_choice(MODEL_KINDS), doc="permittivity variant"),
    "wp_eV": Key(float, doc="plasma frequency, eV-equivalent"),
    "skin_depth_nm": Key(float, doc="alternative to wp_eV: delta0 = c/wp"),
    "gamma_eV": Key(float, doc="relaxation at T_R (constant when gamma_p is unset)"),
    "gamma_res_eV": Key(float, doc="residual (impurity) relaxation"),
    "gamma_T_R_K": Key(float, 300.0),
    "gamma_p": Key(float, doc="exponent of the T-dependent relaxation"),
    "eps0": Key(float, doc="static permittivity of a single oscillator"),
    "osc_eV": Key(float, doc="oscillator frequency for eps0"),
    "osc_gamma_eV": Key(float, 0.0),
    "oscillators": Key(_triples, doc="g_eV2:omega_eV:gamma_eV; ..."),
    "sigma_law": Key(_choice(("activation", "power", "constant"))),
    "sigma_R_rad_s": Key(float, doc="Gaussian dc conductivity at reference"),
    "sigma_gap_eV": Key(float),
    "sigma_beta": Key(float, 1.0),
    "sigma_T_R_K": Key(float, 300.0),
    "table": Key(str, doc="xi_rad_s,eps file"),
    "extrapolate": Key(_bool, False),
}

SCHEMA: dict[str, dict[str, Key]] = {
    "run": {
        "subcommand": Key(_choice(SUBCOMMANDS)),
        "mode": Key(_choice(MODES), "Standard"),
        "seed": Key(int, 0),
        "workers": Key(int, 1),
    },
    "geometry": {
        "a_nm": Key(_floats),
        "a_min_nm": Key(float),
        "a_max_nm": Key(float),
        "a_points": Key(int),
        "T_K": Key(_floats),
    },
    "model": _MODEL_KEYS,
    "data_model": _MODEL_KEYS,
    "carriers": {
        "profile": Key(_choice(("constant", "power", "activation")), "constant"),
        "n0_m3": Key(float),
        "T_R_K": Key(float, 300.0),
        "alpha": Key(float, 1.0),
        "gap_eV": Key(float),
        "statistics": Key(_choice(("MB", "FD")), "MB"),
        "mass_ratio": Key(float, 1.0),
        "kappa_per_m": Key(float),
    },
    "sum": {
        "l_max": Key(int),
        "adaptive": Key(_bool),
        "term_rel_tol": Key(float, 1e-9),
        "quad_rel_tol": Key(float, 1e-11),
        "zero_T_mode": Key(_bool, False),
        "dT_rel": Key(float, 1e-3),
        "da_rel": Key(float, 1e-4),
        "l_switch": Key(int, 256),
        "gregory_order": Key(int, 8),
    },
    "scan": {
        "T_K": Key(_floats),
        "zeta1_low": Key(float),
        "points": Key(int, 6),
        "ratio": Key(float, 2.0),
        "power": Key(float),
        "resolve_frac": Key(float, 0.1),
    },
    "compare": {
        "data": Key(str),
        "rel_error": Key(float),
        "level": Key(float, 0.95),
        "test_level": Key(float),
        "observable": Key(_choice(("pressure", "force", "force-gradient")), "pressure"),
        "R_um": Key(float),
        "band_rel_width": Key(float, 0.0),
        "windows_nm": Key(_pairs),
    },
    "output": {
        "path": Key(str, "-"),
        "format": Key(_choice(("csv", "json")), "csv"),
    },
}

# sections whose defaults are materialised only when the section is present
_OPTIONAL = ("model", "data_model", "carriers", "scan", "compare")


@dataclass(frozen=True)
class RunConfig:
    """Validated run description. ``values[section][key]`` holds typed values."""

    subcommand: str
    values: dict = field(default_factory=dict)
    base_dir: str | None = field(default=None, compare=False)

    def get(self, section, key, default=None):
        v = self.values.get(section, {}).get(key)
        return default if v is None else v

    def has(self, section):
        return section in self.values

    @property
    def mode(self):
        return self.get("run", "mode", "Standard")

    @property
    def seed(self):
        return self.get("run", "seed", 0)

    def a_grid_m(self):
        a = self.get("geometry", "a_nm")
        if a is not None:
            return tuple(v / 1e9 for v in a)
        lo, hi, n = (self.get("geometry", k) for k in ("a_min_nm", "a_max_nm", "a_points"))
        if n == 1:
            return (lo / 1e9,)
        return tuple(lo / 1e9 * (hi / lo) ** (k / (n - 1)) for k in range(n))

    def T_grid(self):
        return self.get("geometry", "T_K", ())


def _nearest(name, options):
    hit = difflib.get_close_matches(name, list(options), n=1, cutoff=0.0)
    return hit[0] if hit else None


def _read(text):
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    cp.optionxform = str  # keys are case-sensitive (wp_eV, T_K)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ValidationError([f"syntax: {exc}"]) from None
    return cp


def parse_config(text, subcommand=None, overrides=None, base_dir=None) -> RunConfig:
    """Parse and validate INI text.

    ``subcommand`` and ``overrides`` (``{"section.key": "text"}``) take
    precedence over the file.  ``base_dir`` resolves relative data paths.
    Raises :class:`ValidationError` listing every problem found.
    """
    cp = _read(text)
    raw: dict[str, dict[str, str]] = {s: dict(cp[s]) for s in cp.sections()}
    problems = []
    for dotted, v in (overrides or {}).items():
        if "." not in dotted:
            problems.append(f"override {dotted!r} must look like section.key=value")
            continue
        sec, key = dotted.split(".", 1)
        raw.setdefault(sec, {})[key] = v
    if subcommand is not None:
        raw.setdefault("run", {})["subcommand"] = subcommand

    values: dict[str, dict[str, Any]] = {}
    for sec, items in raw.items():
        if sec not in SCHEMA:
            problems.append(f"unknown section [{sec}] (did you mean [{_nearest(sec, SCHEMA)}]?)")
            continue
        schema = SCHEMA[sec]
        out = values.setdefault(sec, {})
        for key, text_value in items.items():
            if key not in schema:
                problems.append(f"[{sec}] unknown key {key!r} (did you mean {_nearest(key, schema)!r}?)")
                continue
            try:
                out[key] = schema[key].conv(text_value)
            except ValueError as exc:
                problems.append(f"[{sec}] {key} = {text_value!r}: {exc}")
    for sec, schema in SCHEMA.items():
        if sec in _OPTIONAL and sec not in values:
            continue
        out = values.setdefault(sec, {})
        for key, spec in schema.items():
            if key not in out and spec.default is not None:
                out[key] = spec.default

    cfg = RunConfig(values.get("run", {}).get("subcommand"), values, base_dir)
    problems += _validate(cfg, base_dir)
    if problems:
        raise ValidationError(problems)
    return cfg


def _check_model(cfg, sec, problems, base_dir):
    m = cfg.values.get(sec, {})
    kind = m.get("kind")
    if kind is None:
        problems.append(f"[{sec}] kind is required ({', '.join(MODEL_KINDS)})")
        return
    if kind in ("plasma", "drude"):
        have = [k for k in ("wp_eV", "skin_depth_nm") if k in m]
        if len(have) != 1:
            problems.append(f"[{sec}] {kind} needs exactly one of wp_eV, skin_depth_nm")
        if kind == "drude" and "gamma_eV" not in m and "gamma_res_eV" not in m:
            problems.append(f"[{sec}] drude needs gamma_eV and/or gamma_res_eV")
    if kind in ("oscillator", "dc-insulator"):
        single = "eps0" in m or "osc_eV" in m
        if single == ("oscillators" in m):
            problems.append(f"[{sec}] give either eps0 + osc_eV or oscillators")
        elif single and not ("eps0" in m and "osc_eV" in m):
            problems.append(f"[{sec}] eps0 and osc_eV go together")
    if kind == "dc-insulator":
        law = m.get("sigma_law")
        if law is None or "sigma_R_rad_s" not in m:
            problems.append(f"[{sec}] dc-insulator needs sigma_law and sigma_R_rad_s")
        elif law == "activation" and "sigma_gap_eV" not in m:
            problems.append(f"[{sec}] activation law needs sigma_gap_eV")
    if kind == "tabulated":
        path = m.get("table")
        if path is None:
            problems.append(f"[{sec}] tabulated needs table")
        elif not os.path.exists(_resolve(path, base_dir)):
            problems.append(f"[{sec}] table file not found: {path}")


def _resolve(path, base_dir):
    if base_dir is None or os.path.isabs(path):
        return path
    return os.path.join(base_dir, path)


def _positive(cfg, problems, sec, key):
    v = cfg.values.get(sec, {}).get(key)
    if v is None:
        return
    vals = v if isinstance(v, tuple) else (v,)
    if any(not (math.isfinite(x) and x > 0) for x in vals):
        problems.append(f"[{sec}] {key} must be > 0")


def _validate(cfg: RunConfig, base_dir):
    problems = []
    sub = cfg.subcommand
    if sub is None:
        problems.append("[run] subcommand is required (or pass it on the command line)")
    if "model" not in cfg.values or not cfg.values["model"]:
        problems.append("missing [model] section")
    else:
        _check_model(cfg, "model", problems, base_dir)
    if cfg.values.get("data_model"):
        _check_model(cfg, "data_model", problems, base_dir)

    s = cfg.values.get("sum", {})
    if "l_max" in s and "adaptive" in s:
        problems.append("[sum] l_max and adaptive conflict: set only one")
    elif s.get("adaptive") is False:
        problems.append("[sum] adaptive = false requires l_max instead")

    g = cfg.values.get("geometry", {})
    grid_keys = [k for k in ("a_min_nm", "a_max_nm", "a_points") if k in g]
    if "a_nm" in g and grid_keys:
        problems.append("[geometry] a_nm conflicts with a_min_nm/a_max_nm/a_points")
    elif "a_nm" not in g and len(grid_keys) != 3:
        problems.append("[geometry] give a_nm or all of a_min_nm, a_max_nm, a_points")
    elif grid_keys and g["a_points"] < 1:
        problems.append("[geometry] a_points must be >= 1")
    for key in ("a_nm", "a_min_nm", "a_max_nm"):
        _positive(cfg, problems, "geometry", key)
    if sub in ("energy", "pressure", "classical", "compare") and "T_K" not in g:
        problems.append(f"[geometry] T_K is required for {sub}")
    if any(t < 0 for t in g.get("T_K", ())):
        problems.append("[geometry] T_K must be >= 0")
    if sub in ("entropy-scan", "nernst") and len(g.get("a_nm", ())) != 1:
        problems.append(f"[geometry] {sub} needs a single a_nm")
    if sub == "classical" and any(t <= 0 for t in g.get("T_K", ())):
        problems.append("[geometry] classical needs T_K > 0")

    sc = cfg.values.get("scan", {})
    _positive(cfg, problems, "scan", "T_K")
    if "T_K" in sc and ("zeta1_low" in sc):
        problems.append("[scan] T_K conflicts with zeta1_low")

    carriers = cfg.values.get("carriers")
    if carriers is not None:
        if "n0_m3" not in carriers and "kappa_per_m" not in carriers:
            problems.append("[carriers] needs n0_m3 or kappa_per_m")
        if carriers.get("profile") == "activation" and "gap_eV" not in carriers:
            problems.append("[carriers] activation profile needs gap_eV")

    if sub == "compare":
        c = cfg.values.get("compare", {})
        if ("data" in c) == ("rel_error" in c):
            problems.append("[compare] give either data (file) or rel_error (synthetic)")
        if "rel_error" in c and not cfg.values.get("data_model"):
            problems.append("[compare] synthetic data needs a [data_model] section")
        if "data" in c and not os.path.exists(_resolve(c["data"], base_dir)):
            problems.append(f"[compare] data file not found: {c['data']}")
        if c.get("observable", "pressure") != "pressure" and "R_um" not in c:
            problems.append("[compare] sphere observables need R_um")
        for key in ("level", "test_level"):
            v = c.get(key)
            if v is not None and not 0 < v < 1:
                problems.append(f"[compare] {key} must lie in (0, 1)")
    return problems


def serialize_config(cfg: RunConfig) -> str:
    """INI text of the resolved configuration, sections and keys in schema order."""
    lines = []
    for sec, schema in SCHEMA.items():
        vals = cfg.values.get(sec)
        if vals is None:
            continue
        lines.append(f"[{sec}]")
        for key in schema:
            if key in vals:
                lines.append(f"{key} = {_fmt(vals[key])}")
        lines.append("")
    return "\n".join(lines)


def load_config(path, subcommand=None, overrides=None):
    with open(path) as fh:
        text = fh.read()
    return parse_config(text, subcommand, overrides, base_dir=os.path.dirname(os.path.abspath(path)))
