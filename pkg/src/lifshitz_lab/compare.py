"""Theory-versus-experiment comparison at a common confidence level.

The per-point rule is interval overlap: a point is excluded when the
distance between measurement and theory exceeds the sum of the measurement
half-width and the theory half-width, both taken at the same level.  This is
a stand-in for a full statistical analysis and reports say so.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.stats import norm

from .errors import CoverageError, DomainError
from .engine import Geometry, Mode, SumSettings, free_energy, pressure

OBSERVABLES = ("force", "force-gradient", "pressure")
RULE_NOTE = "interval-overlap rule (stand-in for a full statistical procedure)"


def _check_level(level):
    if not 0.0 < level < 1.0:
        raise DomainError(f"confidence level must lie in (0, 1), got {level}")


@dataclass(frozen=True)
class ExperimentSet:
    a: tuple
    value: tuple
    half_width: tuple
    level: float
    observable: str = "pressure"

    def __post_init__(self):
        for name in ("a", "value", "half_width"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if not (len(self.a) == len(self.value) == len(self.half_width)) or not self.a:
            raise DomainError("experiment columns must be non-empty and of equal length")
        if np.any(np.diff(self.a) <= 0):
            raise DomainError("separations must be strictly increasing")
        if any(w < 0 for w in self.half_width):
            raise DomainError("error half-widths must be >= 0")
        if self.observable not in OBSERVABLES:
            raise DomainError(f"observable must be one of {OBSERVABLES}")
        _check_level(self.level)

    def at_level(self, level):
        hw = tuple(rescale_confidence(w, self.level, level) for w in self.half_width)
        return ExperimentSet(self.a, self.value, hw, level, self.observable)


@dataclass(frozen=True)
class TheoryBand:
    a: tuple
    center: tuple
    half_width: tuple
    level: float
    provenance: str = ""

    def __post_init__(self):
        for name in ("a", "center", "half_width"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if not (len(self.a) == len(self.center) == len(self.half_width)) or len(self.a) < 2:
            raise DomainError("theory band needs >= 2 rows of equal-length columns")
        if np.any(np.diff(self.a) <= 0):
            raise DomainError("band separations must be strictly increasing")
        if any(w < 0 for w in self.half_width):
            raise DomainError("band half-widths must be >= 0")
        _check_level(self.level)

    def at_level(self, level):
        hw = tuple(rescale_confidence(w, self.level, level) for w in self.half_width)
        return TheoryBand(self.a, self.center, hw, level, self.provenance)

    def interpolate(self, a):
        a = np.asarray(a, dtype=float)
        c = PchipInterpolator(self.a, self.center)(a)
        w = PchipInterpolator(self.a, self.half_width)(a)
        return c, np.maximum(w, 0.0)


@dataclass(frozen=True)
class ExclusionReport:
    level: float
    a: tuple
    per_point: tuple
    aggregate: str
    windows: tuple
    rule: str = RULE_NOTE
    deviation: tuple = field(default=())
    allowed: tuple = field(default=())

    def to_dict(self):
        return {
            "level": self.level,
            "rule": self.rule,
            "aggregate": self.aggregate,
            "windows": [list(w) for w in self.windows],
            "a_m": list(self.a),
            "per_point": list(self.per_point),
            "deviation": list(self.deviation),
            "allowed": list(self.allowed),
        }


def rescale_confidence(half_width, from_level, to_level):
    """Convert a two-sided Gaussian half-width between confidence levels."""
    _check_level(from_level)
    _check_level(to_level)
    if from_level == to_level:
        return half_width
    factor = float(norm.ppf(0.5 * (1.0 + to_level)) / norm.ppf(0.5 * (1.0 + from_level)))
    return half_width * factor


def pfa_sphere_force(R, free_energy_per_area, a=None):
    """Sphere-plate force ``2 pi R F_pp(a)`` in the proximity-force approximation."""
    if R <= 0:
        raise DomainError("sphere radius must be > 0")
    if a is not None and R / a < 100:
        warnings.warn(f"R/a = {R / a:.3g} < 100: proximity-force approximation is poor", stacklevel=2)
    return 2.0 * math.pi * R * free_energy_per_area


def _longest_run(flags):
    best = cur = 0
    for f in flags:
        cur = cur + 1 if f else 0
        best = max(best, cur)
    return best


def exclusion_test(data: ExperimentSet, band: TheoryBand, level=None, windows=None):
    """Per-point and aggregate exclusion verdicts at a single confidence level.

    ``windows`` is a list of ``(a_lo, a_hi)`` ranges; a window is excluded
    when its longest run of consecutive excluded points is a strict majority
    of the points it contains.  Default is one window spanning the data.
    """
    level = data.level if level is None else level
    _check_level(level)
    d = data.at_level(level)
    b = band.at_level(level)
    a = np.asarray(d.a)
    covered = (a >= b.a[0]) & (a <= b.a[-1])
    if not np.any(covered):
        raise CoverageError(
            f"data range [{a[0]:.4g}, {a[-1]:.4g}] m and band range "
            f"[{b.a[0]:.4g}, {b.a[-1]:.4g}] m do not overlap"
        )
    if not np.all(covered):
        warnings.warn("data points outside the theory band range are ignored", stacklevel=2)
    a = a[covered]
    val = np.asarray(d.value)[covered]
    hw = np.asarray(d.half_width)[covered]
    c, w = b.interpolate(a)
    dev = np.abs(val - c)
    allowed = hw + w
    excluded = dev > allowed
    per = tuple("Excluded" if e else "Consistent" for e in excluded)
    windows = tuple(tuple(map(float, w_)) for w_ in (windows or [(float(a[0]), float(a[-1]))]))
    agg = "Consistent" if not np.any(excluded) else "Inconclusive"
    for lo, hi in windows:
        inside = (a >= lo) & (a <= hi)
        n = int(inside.sum())
        if n and _longest_run(excluded[inside]) * 2 > n:
            agg = "Excluded"
            break
    return ExclusionReport(
        level=level, a=tuple(map(float, a)), per_point=per, aggregate=agg, windows=windows,
        deviation=tuple(map(float, dev)), allowed=tuple(map(float, allowed)),
    )


def synth_experiment(band: TheoryBand, rel_error, level, seed, observable="pressure"):
    """Synthetic measurements: band centers plus Gaussian noise.

    Each point gets a half-width ``rel_error * |center|`` at ``level``; the
    noise standard deviation is that half-width divided by the two-sided
    normal quantile of ``level``.
    """
    _check_level(level)
    if rel_error < 0:
        raise DomainError("rel_error must be >= 0")
    rng = np.random.default_rng(seed)
    c = np.asarray(band.center)
    hw = rel_error * np.abs(c)
    z = norm.ppf(0.5 * (1.0 + level))
    noise = rng.standard_normal(c.size)
    return ExperimentSet(band.a, tuple(c + noise * hw / z), tuple(hw), level, observable)


def theory_band(
    model,
    a_grid: Sequence[float],
    T,
    mode=Mode.STANDARD,
    observable="pressure",
    rel_half_width=0.0,
    level=0.95,
    R=None,
    s: SumSettings | None = None,
):
    """Evaluate a theory band on ``a_grid``.

    ``pressure`` is the plate-plate pressure; ``force`` and
    ``force-gradient`` are sphere-plate quantities of radius ``R`` in the
    proximity-force approximation.
    """
    if observable not in OBSERVABLES:
        raise DomainError(f"observable must be one of {OBSERVABLES}")
    if observable != "pressure" and R is None:
        raise DomainError(f"{observable} needs a sphere radius R")
    mode = Mode.parse(mode)
    vals = []
    for a in a_grid:
        g = Geometry(float(a), float(T))
        if observable == "pressure":
            vals.append(pressure(g, model, mode, s))
        elif observable == "force":
            vals.append(pfa_sphere_force(R, free_energy(g, model, mode, s).value, a))
        else:
            vals.append(-2.0 * math.pi * R * pressure(g, model, mode, s))
    vals = np.asarray(vals)
    prov = f"{model.kind}/{mode.value}"
    return TheoryBand(tuple(a_grid), tuple(vals), tuple(rel_half_width * np.abs(vals)), level, prov)


def read_experiment(path):
    """Parse ``a_m,value,half_width`` rows with ``#level=`` / ``#observable=`` metadata."""
    meta, rows = {}, []
    with open(path, newline="") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "=" in line:
                    k, v = line[1:].split("=", 1)
                    meta[k.strip()] = v.strip()
                continue
            rows.append(line)
    reader = list(csv.reader(rows))
    if not reader or [c.strip() for c in reader[0]] != ["a_m", "value", "half_width"]:
        raise DomainError(f"{path}: header must be 'a_m,value,half_width'")
    if "level" not in meta:
        raise DomainError(f"{path}: missing '#level=' metadata line")
    cols = list(zip(*[[float(c) for c in r] for r in reader[1:]]))
    return ExperimentSet(cols[0], cols[1], cols[2], float(meta["level"]), meta.get("observable", "pressure"))


def write_experiment(path, data: ExperimentSet):
    with open(path, "w", newline="") as fh:
        fh.write(f"#level={data.level!r}\n#observable={data.observable}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["a_m", "value", "half_width"])
        for row in zip(data.a, data.value, data.half_width):
            w.writerow([repr(v) for v in row])
