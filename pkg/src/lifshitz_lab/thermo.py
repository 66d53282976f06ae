"""Low-temperature entropy: closed-form limits, scans and Nernst verdicts."""

from __future__ import annotations

import csv
import enum
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .constants import C, HBAR, K_B
from .errors import DomainError
from .engine import Geometry, Mode, SumSettings, entropy_estimate
from .materials import (
    DcInsulatorModel,
    DrudeModel,
    MaterialModel,
    OscillatorModel,
    TabulatedModel,
)

# -- special functions --------------------------------------------------------

_BERNOULLI_2M = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510, 43867 / 798, -174611 / 330)


def zeta3():
    """Apery's constant from the central-binomial series (error < 4**-40)."""
    total = 0.0
    binom = 1.0
    terms = []
    for n in range(1, 41):
        binom = binom * (2 * n) * (2 * n - 1) / (n * n)
        terms.append((-1) ** (n + 1) / (n**3 * binom))
    total = math.fsum(terms)
    return 2.5 * total


ZETA3 = zeta3()
ZETA2 = math.pi**2 / 6


def polylog3(z):
    """Trilogarithm ``Li3(z) = sum z**n / n**3`` for ``0 <= z <= 1``.

    The power series is used for ``z <= 1/2``; closer to 1 the expansion in
    ``mu = ln z`` converges geometrically in ``|mu| / (2 pi)``.
    """
    if not 0.0 <= z <= 1.0:
        raise DomainError(f"polylog3 is implemented on [0, 1], got {z}")
    if z == 1.0:
        return ZETA3
    if z <= 0.5:
        terms, p, n = [], z, 1
        while True:
            t = p / n**3
            terms.append(t)
            if t < 1e-18 * terms[0] or n > 200:
                break
            n += 1
            p *= z
        return math.fsum(terms)
    mu = math.log(z)
    terms = [ZETA3, ZETA2 * mu, 0.5 * mu * mu * (1.5 - math.log(-mu))]
    # zeta(3 - k) / k! * mu**k for k >= 3: zeta(0) = -1/2, zeta(1 - 2m) = -B_2m / (2m)
    terms.append(-0.5 * mu**3 / 6)
    fact = 6.0
    for k in range(4, 24):
        fact *= k
        if k % 2 == 1:
            continue
        m = (k - 2) // 2
        zeta_neg = -_BERNOULLI_2M[m - 1] / (2 * m)
        terms.append(zeta_neg * mu**k / fact)
    return math.fsum(terms)


# -- closed-form limits -------------------------------------------------------


def entropy_unit(a):
    """``k_B zeta(3) / (16 pi a^2)``, the natural size of the static-term entropy."""
    return K_B * ZETA3 / (16.0 * math.pi * a * a)


def drude_entropy_limit(a, delta0, order=2):
    """Low-temperature entropy of a perfect-lattice Drude metal.

    ``-(k_B zeta(3) / (16 pi a^2)) * (1 - 4 d + 12 d**2)`` with
    ``d = delta0 / a``, truncated after ``order`` corrections.
    """
    if order not in (0, 1, 2):
        raise DomainError("order must be 0, 1 or 2")
    d = delta0 / a
    if not 0 <= d < 0.3:
        raise DomainError(f"delta0/a = {d:.3g} outside the asymptotic range [0, 0.3)")
    series = (1.0, -4.0 * d, 12.0 * d * d)[: order + 1]
    return -entropy_unit(a) * math.fsum(series)


def dc_entropy_limit(a, eps0):
    """Low-temperature entropy of a dielectric with dc conductivity included.

    ``(k_B / (16 pi a^2)) * (zeta(3) - Li3(r0**2))``, ``r0 = (eps0-1)/(eps0+1)``.
    """
    if not eps0 >= 1:
        raise DomainError("eps0 must be >= 1")
    if math.isinf(eps0):
        return 0.0
    r0 = (eps0 - 1.0) / (eps0 + 1.0)
    return K_B / (16.0 * math.pi * a * a) * (ZETA3 - polylog3(r0 * r0))


# -- scans --------------------------------------------------------------------


class Classification(str, enum.Enum):
    SATISFIES = "SatisfiesNernst"
    VIOLATES_NEGATIVE = "ViolatesNegative"
    VIOLATES_POSITIVE = "ViolatesPositive"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class EntropyCurve:
    a: float
    T: tuple
    S: tuple
    S_err: tuple
    limit: float
    uncertainty: float
    extrapolation_spread: float
    log_limit: float = math.nan
    power: float = 1.0
    model: MaterialModel | None = None
    mode: Mode = Mode.STANDARD

    def __post_init__(self):
        T = np.asarray(self.T)
        if T.size < 2 or np.any(np.diff(T) >= 0) or np.any(T <= 0):
            raise DomainError("temperature grid must be strictly descending and positive")
        if self.uncertainty < 0:
            raise DomainError("uncertainty must be >= 0")


@dataclass(frozen=True)
class NernstVerdict:
    classification: Classification
    closed_form: str | None
    residual: float | None
    limit: float
    uncertainty: float
    expected: float | None = None


def impurity_zeta(a, model):
    """Dimensionless frequency below which impurity relaxation switches off TE reflection.

    For a Drude metal with residual relaxation the TE coefficient at
    ``xi << gamma`` is controlled by ``(2 a / delta0)**2 * xi / gamma_res``;
    it falls below one at ``zeta ~ (2 a gamma_res / c) * (delta0 / 2 a)**2``.
    """
    if not isinstance(model, DrudeModel) or model.relaxation.perfect_lattice:
        return None
    d = model.skin_depth / (2.0 * a)
    return 2.0 * a * model.relaxation.gamma_res / C * d * d


def default_scan_grid(a, zeta1_low=None, points=6, ratio=2.0, model=None):
    """Descending geometric grid whose lowest point has ``zeta_1 = zeta1_low``.

    Without an explicit ``zeta1_low`` the coldest point sits at
    ``zeta_1 = 1e-2``, or two decades below :func:`impurity_zeta` for a
    Drude metal with impurities, whichever is colder.
    """
    if zeta1_low is None:
        zeta1_low = 1e-2
        zi = impurity_zeta(a, model)
        if zi is not None:
            zeta1_low = min(zeta1_low, 1e-2 * zi)
    if points < 5:
        raise DomainError("an entropy scan needs at least 5 temperatures")
    T_low = zeta1_low * HBAR * C / (4.0 * math.pi * a * K_B)
    return tuple(T_low * ratio**k for k in range(points - 1, -1, -1))


class Extrapolation(NamedTuple):
    limit: float
    spread: float
    propagated: float
    log_limit: float

    @property
    def uncertainty(self):
        return self.spread + self.propagated + abs(self.limit - self.log_limit)


def _basis_weights(x, log_terms):
    """Weights ``w`` with ``w @ S`` = value at ``x = 0`` of the interpolant through ``(x, S)``.

    The basis is ``1, x, x^2, ...`` or, with ``log_terms``,
    ``1, x ln x, x, x^2 ln x, x^2, ...``.
    """
    x = np.asarray(x, dtype=float) / np.max(x)
    n = x.size
    cols, k = [np.ones_like(x)], 1
    while len(cols) < n:
        if log_terms:
            cols.append(x**k * np.log(x))
        if len(cols) < n:
            cols.append(x**k)
        k += 1
    e0 = np.zeros(n)
    e0[0] = 1.0
    return np.linalg.solve(np.array(cols), e0)


def extrapolate_to_zero(T, S, S_err=None, power=1.0):
    """Extrapolate samples ``S(T)`` to ``T = 0`` in the variable ``x = T**power``.

    The limit is the Richardson (polynomial-in-x) value through all points.
    ``spread`` is its difference from the next-lower order built on the
    coldest points, ``propagated`` carries the sample errors through the
    weights, and ``log_limit`` repeats the extrapolation in a basis with
    ``x^k ln x`` terms so that logarithmic approaches show up as a
    discrepancy.
    """
    x = np.asarray(T, dtype=float) ** power
    S = np.asarray(S, dtype=float)
    err = np.zeros(S.size) if S_err is None else np.asarray(S_err, dtype=float)
    w_full = _basis_weights(x, False)
    limit = math.fsum(w_full * S)
    # grid is descending, so the coldest subset drops index 0
    lower = math.fsum(_basis_weights(x[1:], False) * S[1:])
    log_limit = math.fsum(_basis_weights(x, True) * S)
    return Extrapolation(limit, abs(limit - lower), math.fsum(np.abs(w_full) * err), log_limit)


def nernst_scan(
    a,
    model: MaterialModel,
    mode=Mode.STANDARD,
    T_grid: Sequence[float] | None = None,
    s: SumSettings | None = None,
    workers: int = 1,
    power: float | None = None,
):
    """Sample the entropy on a descending grid and extrapolate to ``T = 0``.

    The reported uncertainty adds the spread between the two highest
    extrapolation orders, the per-sample finite-difference errors carried
    through the extrapolation weights, and the discrepancy between the
    polynomial and log-augmented extrapolations.  ``power`` selects the expansion
    variable ``T**power``; by default 1/2 when a Debye-Hueckel screening
    parameter diverges as ``T -> 0`` (corrections go as ``1/kappa``) and 1
    otherwise.  The default grid comes from :func:`default_scan_grid`.
    """
    s = s or SumSettings()
    mode = Mode.parse(mode)
    if T_grid is None:
        T_grid = default_scan_grid(a, model=model)
    T_grid = tuple(float(t) for t in T_grid)
    if power is None:
        power = expansion_power(model, mode)
    if len(T_grid) < 3:
        raise DomainError("an entropy scan needs at least 3 temperatures")

    def one(T):
        return entropy_estimate(Geometry(a, T), model, mode, s)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(one, T_grid))
    else:
        samples = [one(T) for T in T_grid]
    S = tuple(v for v, _ in samples)
    S_err = tuple(e for _, e in samples)
    ex = extrapolate_to_zero(T_grid, S, S_err, power)
    return EntropyCurve(
        a=a, T=T_grid, S=S, S_err=S_err, limit=ex.limit, uncertainty=ex.uncertainty,
        extrapolation_spread=ex.spread, log_limit=ex.log_limit, power=power, model=model, mode=mode,
    )


def expansion_power(model, mode=Mode.STANDARD):
    carriers = getattr(model, "carriers", None)
    if (
        Mode.parse(mode) is Mode.MODIFIED_L0
        and carriers is not None
        and carriers.kappa_override is None
        and carriers.statistics == "MB"
        and not carriers.vanishes_at_zero
    ):
        return 0.5
    return 1.0


def expected_closed_form(a, model: MaterialModel, mode=Mode.STANDARD):
    """Closed-form T -> 0 entropy predicted for this model, if one applies.

    Returns ``(tag, value)`` with tag ``"Eq6"``, ``"Eq8"`` or ``None``
    (``None`` with value 0 means the entropy is expected to vanish; ``None``
    with value ``None`` means no prediction).
    """
    mode = Mode.parse(mode)
    if isinstance(model, DrudeModel):
        if model.relaxation.perfect_lattice:
            d = model.skin_depth
            if d / a < 0.3:
                return "Eq6", drude_entropy_limit(a, d, 2)
            return None, None
        return None, 0.0
    dielectric = isinstance(model, (OscillatorModel, DcInsulatorModel, TabulatedModel))
    if mode is Mode.MODIFIED_L0 and dielectric and model.carriers is not None:
        if model.carriers.vanishes_at_zero:
            return None, 0.0
        return "Eq8", dc_entropy_limit(a, model.eps0)
    if isinstance(model, DcInsulatorModel) and mode is Mode.STANDARD:
        if model.sigma.sigma_R > 0 and model.sigma.vanishes_at_zero:
            return "Eq8", dc_entropy_limit(a, model.eps0)
        return None, None
    return None, 0.0


def nernst_verdict(curve: EntropyCurve, a=None, model=None, mode=None, resolve_frac=0.1):
    """Classify the extrapolated limit against its uncertainty.

    ``Inconclusive`` when the uncertainty exceeds ``resolve_frac`` of
    ``k_B zeta(3)/(16 pi a^2)``, i.e. the scan cannot resolve the static-term
    scale.  The residual against a matching closed form is relative.
    """
    a = curve.a if a is None else a
    model = curve.model if model is None else model
    mode = curve.mode if mode is None else Mode.parse(mode)
    S0, u = curve.limit, curve.uncertainty
    if u > resolve_frac * entropy_unit(a):
        cls = Classification.INCONCLUSIVE
    elif S0 < -u:
        cls = Classification.VIOLATES_NEGATIVE
    elif S0 > u:
        cls = Classification.VIOLATES_POSITIVE
    else:
        cls = Classification.SATISFIES
    tag, value, residual = None, None, None
    if model is not None:
        tag, value = expected_closed_form(a, model, mode)
        if tag is not None:
            residual = (S0 - value) / abs(value)
    return NernstVerdict(cls, tag, residual, S0, u, value)


def curve_to_csv(curve: EntropyCurve, verdict: NernstVerdict | None = None):
    """Delimited table ``T_K,S_J_per_K_m2,S_err`` with '#' footer rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["T_K", "S_J_per_K_m2", "S_err"])
    for T, S, e in zip(curve.T, curve.S, curve.S_err):
        w.writerow([f"{T:.12e}", f"{S:.12e}", f"{e:.6e}"])
    buf.write(f"# limit={curve.limit:.12e}\n")
    buf.write(f"# uncertainty={curve.uncertainty:.6e}\n")
    if verdict is not None:
        buf.write(f"# verdict={verdict.classification.value}\n")
        buf.write(f"# closed_form={verdict.closed_form}\n")
        if verdict.residual is not None:
            buf.write(f"# residual={verdict.residual:.6e}\n")
    return buf.getvalue()
