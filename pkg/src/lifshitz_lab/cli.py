"""Command-line front end.

``lifshitz-lab <subcommand> --config run.ini [--out PATH] [--format csv|json]
[--seed N] [--no-timestamp] [--set section.key=value ...]``

Flags win over the file.  Every output starts with ``#`` header lines carrying
the package version, the constants and the resolved configuration; the CSV
body that follows depends only on the configuration.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__, constants
from .compare import (
    exclusion_test,
    read_experiment,
    synth_experiment,
    theory_band,
)
from .config import RunConfig, _resolve, load_config, serialize_config
from .constants import C, EV_TO_RAD_S
from .engine import Geometry, Mode, SumSettings, classical_l0, free_energy, pressure
from .errors import LifshitzError, ValidationError
from .materials import (
    CarrierProfile,
    ConductivityLaw,
    Oscillator,
    RelaxationLaw,
    dc_insulator,
    drude,
    load_tabulated,
    oscillator,
    oscillator_from_eps0,
    perfect_conductor,
    plasma,
)
from .thermo import default_scan_grid, nernst_scan, nernst_verdict


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)
    footer: dict = field(default_factory=dict)


# -- construction from config -------------------------------------------------


def build_carriers(cfg: RunConfig):
    if not cfg.has("carriers"):
        return None
    c = cfg.values["carriers"]
    return CarrierProfile(
        kind=c["profile"],
        n0=c.get("n0_m3", 0.0),
        T_R=c["T_R_K"],
        alpha=c["alpha"],
        delta=c.get("gap_eV", 0.0) * constants.EV,
        statistics=c["statistics"],
        mass_ratio=c["mass_ratio"],
        kappa_override=c.get("kappa_per_m"),
    )


def _oscillator_block(m, carriers=None):
    if "oscillators" in m:
        terms = [Oscillator(g * EV_TO_RAD_S**2, w * EV_TO_RAD_S, gam * EV_TO_RAD_S) for g, w, gam in m["oscillators"]]
        return oscillator(terms, carriers)
    return oscillator_from_eps0(m["eps0"], m["osc_eV"] * EV_TO_RAD_S, m["osc_gamma_eV"] * EV_TO_RAD_S, carriers)


def build_model(cfg: RunConfig, section="model"):
    """Material model described by ``[model]`` (or ``[data_model]``)."""
    m = cfg.values[section]
    carriers = build_carriers(cfg)
    kind = m["kind"]
    if kind in ("plasma", "drude"):
        wp = m["wp_eV"] * EV_TO_RAD_S if "wp_eV" in m else C / (m["skin_depth_nm"] / 1e9)
        if kind == "plasma":
            return plasma(wp, carriers)
        res = m.get("gamma_res_eV", 0.0) * EV_TO_RAD_S
        gam = m.get("gamma_eV", 0.0) * EV_TO_RAD_S
        if "gamma_p" in m:
            law = RelaxationLaw(res, gam, m["gamma_T_R_K"], m["gamma_p"])
        else:
            law = RelaxationLaw.constant(res + gam)
        return drude(wp, relaxation=law, carriers=carriers)
    if kind == "oscillator":
        return _oscillator_block(m, carriers)
    if kind == "dc-insulator":
        sigma = ConductivityLaw(
            kind=m["sigma_law"],
            sigma_R=m["sigma_R_rad_s"],
            delta=m.get("sigma_gap_eV", 0.0) * constants.EV,
            beta=m["sigma_beta"],
            T_R=m["sigma_T_R_K"],
        )
        return dc_insulator(_oscillator_block(m), sigma, carriers)
    if kind == "tabulated":
        model = load_tabulated(_resolve(m["table"], cfg.base_dir), m["extrapolate"])
        return model.with_carriers(carriers) if carriers is not None else model
    return perfect_conductor()


def build_settings(cfg: RunConfig) -> SumSettings:
    s = cfg.values.get("sum", {})
    return SumSettings(
        l_max=s.get("l_max", "adaptive"),
        term_rel_tol=s["term_rel_tol"],
        quad_rel_tol=s["quad_rel_tol"],
        zero_T_mode=s["zero_T_mode"],
        dT_rel=s["dT_rel"],
        da_rel=s["da_rel"],
        l_switch=s["l_switch"],
        gregory_order=s["gregory_order"],
    )


# -- subcommands ----------------------------------------------------------------


def _points(cfg):
    for a in cfg.a_grid_m():
        for T in cfg.T_grid():
            yield a, T


def run_energy(cfg, model, s):
    t = Table(["a_m", "T_K", "F_J_m2", "tm_J_m2", "te_J_m2", "l0_J_m2", "l_terms", "tail_J_m2"])
    for a, T in _points(cfg):
        r = free_energy(Geometry(a, T), model, cfg.mode, s)
        t.rows.append((a, T, r.value, r.tm, r.te, r.l0_term, r.l_terms_used, r.tail_estimate))
    return t


def run_pressure(cfg, model, s):
    t = Table(["a_m", "T_K", "P_Pa"])
    for a, T in _points(cfg):
        t.rows.append((a, T, pressure(Geometry(a, T), model, cfg.mode, s)))
    return t


def run_classical(cfg, model, s):
    t = Table(["a_m", "T_K", "l0_J_m2", "ideal_l0_J_m2", "ratio_to_ideal", "F_J_m2", "l0_fraction"])
    ideal = perfect_conductor()
    for a, T in _points(cfg):
        g = Geometry(a, T)
        l0 = classical_l0(g, model, cfg.mode, s)
        l0_ideal = classical_l0(g, ideal, Mode.STANDARD, s)
        F = free_energy(g, model, cfg.mode, s).value
        t.rows.append((a, T, l0, l0_ideal, l0 / l0_ideal, F, l0 / F))
    return t


def _scan(cfg, model, s):
    a = cfg.a_grid_m()[0]
    sc = cfg.values.get("scan", {})
    grid = sc.get("T_K")
    if grid is None:
        grid = default_scan_grid(
            a, zeta1_low=sc.get("zeta1_low"), points=sc.get("points", 6), ratio=sc.get("ratio", 2.0), model=model
        )
    grid = tuple(sorted(grid, reverse=True))
    curve = nernst_scan(a, model, cfg.mode, grid, s, workers=cfg.get("run", "workers", 1), power=sc.get("power"))
    verdict = nernst_verdict(curve, a, model, cfg.mode, resolve_frac=sc.get("resolve_frac", 0.1))
    return a, curve, verdict


def _verdict_footer(curve, verdict):
    out = {
        "limit_J_K_m2": curve.limit,
        "uncertainty_J_K_m2": curve.uncertainty,
        "expansion_power": curve.power,
        "verdict": verdict.classification.value,
        "closed_form": verdict.closed_form or "none",
    }
    if verdict.expected is not None:
        out["expected_J_K_m2"] = verdict.expected
    if verdict.residual is not None:
        out["residual"] = verdict.residual
    return out


def run_entropy_scan(cfg, model, s):
    _, curve, verdict = _scan(cfg, model, s)
    t = Table(["T_K", "S_J_K_m2", "S_err_J_K_m2"])
    t.rows = list(zip(curve.T, curve.S, curve.S_err))
    t.footer = _verdict_footer(curve, verdict)
    return t


def run_nernst(cfg, model, s):
    a, curve, verdict = _scan(cfg, model, s)
    t = Table(["a_m", "limit_J_K_m2", "uncertainty_J_K_m2", "verdict", "closed_form", "expected_J_K_m2", "residual"])
    t.rows.append((
        a, curve.limit, curve.uncertainty, verdict.classification.value, verdict.closed_form or "none",
        math.nan if verdict.expected is None else verdict.expected,
        math.nan if verdict.residual is None else verdict.residual,
    ))
    t.footer = _verdict_footer(curve, verdict)
    return t


def run_compare(cfg, model, s):
    c = cfg.values["compare"]
    T = cfg.T_grid()[0]
    R = c["R_um"] * 1e-6 if "R_um" in c else None
    a_grid = cfg.a_grid_m()
    band = theory_band(model, a_grid, T, cfg.mode, c["observable"], c["band_rel_width"], c["level"], R, s)
    if "data" in c:
        data = read_experiment(_resolve(c["data"], cfg.base_dir))
    else:
        truth = theory_band(build_model(cfg, "data_model"), a_grid, T, cfg.mode, c["observable"], 0.0, c["level"], R, s)
        data = synth_experiment(truth, c["rel_error"], c["level"], cfg.seed, c["observable"])
    windows = [(lo / 1e9, hi / 1e9) for lo, hi in c["windows_nm"]] if "windows_nm" in c else None
    level = c.get("test_level", data.level)
    rep = exclusion_test(data, band, level, windows)
    d = data.at_level(level)
    index = {a: i for i, a in enumerate(d.a)}
    center, width = band.at_level(level).interpolate(rep.a)
    t = Table(["a_m", "value", "half_width", "theory", "theory_half_width", "deviation", "allowed", "status"])
    for k, a in enumerate(rep.a):
        i = index[a]
        t.rows.append((a, d.value[i], d.half_width[i], float(center[k]), float(width[k]),
                       rep.deviation[k], rep.allowed[k], rep.per_point[k]))
    t.footer = {
        "aggregate": rep.aggregate,
        "level": level,
        "observable": c["observable"],
        "band_provenance": band.provenance,
        "rule": rep.rule,
    }
    return t


DISPATCH = {
    "energy": run_energy,
    "pressure": run_pressure,
    "classical": run_classical,
    "entropy-scan": run_entropy_scan,
    "nernst": run_nernst,
    "compare": run_compare,
}


# -- output ---------------------------------------------------------------------


def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


def _cell(v):
    v = _plain(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def header_lines(cfg: RunConfig, timestamp=True):
    lines = [f"lifshitz-lab version={__version__}"]
    if timestamp:
        lines.append("generated=" + _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))
    lines += [f"constant {k}={v!r}" for k, v in constants.as_dict().items()]
    lines.append("config:")
    lines += ["  " + ln for ln in serialize_config(cfg).splitlines() if ln]
    return lines


def render_csv(table: Table, header):
    buf = io.StringIO()
    for ln in header:
        buf.write(f"# {ln}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_cell(v) for v in row])
    for k, v in table.footer.items():
        buf.write(f"# {k}={_cell(v)}\n")
    return buf.getvalue()


def _json_value(v):
    v = _plain(v)
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def render_json(table: Table, cfg: RunConfig, timestamp=True):
    doc = {"version": __version__}
    if timestamp:
        doc["generated"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    doc["constants"] = constants.as_dict()
    doc["config"] = serialize_config(cfg)
    doc["columns"] = {name: [_json_value(r[i]) for r in table.rows] for i, name in enumerate(table.columns)}
    doc["footer"] = {k: _json_value(v) for k, v in table.footer.items()}
    return json.dumps(doc, indent=2) + "\n"


def csv_body(text):
    """Strip '#' lines: the part of a CSV output that must be reproducible."""
    return "".join(ln for ln in text.splitlines(keepends=True) if not ln.startswith("#"))


def execute(cfg: RunConfig, timestamp=True):
    """Run ``cfg`` and return the rendered output text."""
    model = build_model(cfg)
    table = DISPATCH[cfg.subcommand](cfg, model, build_settings(cfg))
    if cfg.get("output", "format") == "json":
        return render_json(table, cfg, timestamp)
    return render_csv(table, header_lines(cfg, timestamp))


# -- entry point ----------------------------------------------------------------


def _parser():
    p = argparse.ArgumentParser(prog="lifshitz-lab", description="Lifshitz free energy, entropy and comparison runs.")
    p.add_argument("subcommand", choices=sorted(DISPATCH))
    p.add_argument("--config", required=True, help="INI run file")
    p.add_argument("--out", help="output path ('-' for stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--seed", type=int)
    p.add_argument("--no-timestamp", action="store_true", help="omit the generation time from headers")
    p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE", help="override a config key")
    return p


def main(argv=None):
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; 2 is reserved for convergence
        return ValidationError.exit_code if exc.code else 0
    overrides = {}
    try:
        for item in args.set:
            if "=" not in item:
                raise ValidationError([f"--set {item!r}: expected SECTION.KEY=VALUE"])
            k, v = item.split("=", 1)
            overrides[k.strip()] = v.strip()
        for flag, key in ((args.out, "output.path"), (args.format, "output.format"), (args.seed, "run.seed")):
            if flag is not None:
                overrides[key] = str(flag)
        try:
            cfg = load_config(args.config, args.subcommand, overrides)
        except OSError as exc:
            raise ValidationError([f"cannot read config: {exc}"]) from None
        text = execute(cfg, timestamp=not args.no_timestamp)
        path = cfg.get("output", "path", "-")
        if path == "-":
            sys.stdout.write(text)
        else:
            with open(path, "w", newline="") as fh:
                fh.write(text)
    except LifshitzError as exc:
        problems = getattr(exc, "problems", None) or [str(exc)]
        for msg in problems:
            print(f"lifshitz-lab: {type(exc).__name__}: {msg}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
