"""Lifshitz free energy per unit area of two identical half-spaces.

Standard Matsubara form with half weight on the static term::

    F(a, T) = k_B T / (8 pi a^2) * sum'_l  I(zeta_l)
    I(zeta) = sum_{TM,TE} int_zeta^inf y ln(1 - r^2(i xi_l, k) e^{-y}) dy

with ``y = 2 a q`` and ``zeta_l = 2 a xi_l / c``.  At ``T = 0`` the sum
becomes ``hbar c / (32 pi^2 a^3) * int_0^inf I(zeta) dzeta``.

Quadrature
    The y-integral uses ``y = zeta + exp(u)`` and the outer zeta-integral
    ``zeta = zeta_L + exp(v)``; both are trapezoid rules on a fixed node set
    that is halved until two successive levels agree to ``quad_rel_tol``.
    Because the nodes do not move with ``T`` or ``a``, the result is a smooth
    function of both, which the finite-difference pressure and entropy rely on.

Matsubara tail
    Terms are summed explicitly while ``l < l_switch``.  When more terms would
    be needed the remainder from ``l_switch`` on is replaced by the integral
    ``(1/zeta_1) int I dzeta`` plus Gregory end corrections built from forward
    differences of the explicit terms.  Reduction is ``math.fsum`` over terms
    in ascending ``l``, so results do not depend on evaluation order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .constants import C, HBAR, K_B
from .errors import ConvergenceError, DomainError, PrecisionError
from .materials import (
    DcInsulatorModel,
    DrudeModel,
    MaterialModel,
    OscillatorModel,
    PerfectConductorModel,
    PlasmaModel,
    TabulatedModel,
    screening_kappa,
)
from .reflection import fresnel_y, modified_tm_zero_y, zero_frequency_y

U_MIN = -42.0
U_MAX = 4.0
H_START = 0.5
MAX_HALVINGS = 7
ZETA_CUT_PAD = 12.0
# rounding budget of one free-energy evaluation, in units of eps * |F|
NOISE_ULPS = 8.0


class Mode(str, enum.Enum):
    STANDARD = "Standard"
    MODIFIED_L0 = "ModifiedL0"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        for m in cls:
            if str(value).lower() == m.value.lower():
                return m
        raise DomainError(f"unknown mode {value!r}; expected Standard or ModifiedL0")


@dataclass(frozen=True)
class Geometry:
    a: float
    T: float

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError(f"gap width must be > 0, got {self.a}")
        if not self.T >= 0:
            raise DomainError(f"temperature must be >= 0, got {self.T}")


@dataclass(frozen=True)
class SumSettings:
    """Truncation, quadrature and differentiation controls.

    ``l_max`` is an int for a hard cut-off or ``"adaptive"``.  ``l_switch``
    is the explicit-term budget in adaptive mode before the accelerated tail
    takes over; ``gregory_order`` is the number of end-correction
    differences.
    """

    l_max: int | str = "adaptive"
    term_rel_tol: float = 1e-9
    quad_rel_tol: float = 1e-11
    zero_T_mode: bool = False
    dT_rel: float = 1e-3
    da_rel: float = 1e-4
    l_switch: int = 256
    gregory_order: int = 8

    def __post_init__(self):
        if self.l_max != "adaptive":
            if isinstance(self.l_max, bool) or not isinstance(self.l_max, int) or self.l_max < 1:
                raise DomainError("l_max must be 'adaptive' or an integer >= 1")
        for name in ("term_rel_tol", "quad_rel_tol", "dT_rel", "da_rel"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise DomainError(f"{name} must lie in (0, 1), got {v}")
        if self.l_switch < 16 or self.gregory_order < 2:
            raise DomainError("l_switch must be >= 16 and gregory_order >= 2")


@dataclass(frozen=True)
class FreeEnergyResult:
    """Free energy per unit area (J/m^2) with its bookkeeping.

    ``tail_estimate`` is the estimated error of the truncated or accelerated
    Matsubara tail; ``tm`` and ``te`` split ``value`` by polarization and
    ``l0_term`` is the half-weight static contribution.
    """

    value: float
    l_terms_used: int
    tail_estimate: float
    tm: float
    te: float
    l0_term: float
    accelerated: bool = False


@dataclass(frozen=True)
class _Plan:
    n_explicit: int
    accelerated: bool
    h_inner: float | None = None
    h_outer: float | None = None


class _Rows(NamedTuple):
    tm: np.ndarray
    te: np.ndarray


# -- elementary pieces --------------------------------------------------------


def matsubara_frequency(l, T):
    """``xi_l = 2 pi k_B T l / hbar`` in rad/s."""
    if l < 0 or T < 0:
        raise DomainError("need l >= 0 and T >= 0")
    return 2.0 * math.pi * K_B * T * l / HBAR


def zeta_1(a, T):
    """Dimensionless first Matsubara frequency ``2 a xi_1 / c``."""
    return 2.0 * a * matsubara_frequency(1, T) / C


def _log_factor(r, w, y):
    """``ln(1 - r^2 e^{-y})`` given ``w = 1 - r^2``, stable near r^2 e^{-y} -> 1."""
    e = np.exp(-y)
    x = r * r * e
    near = x > 0.5
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = np.log1p(-np.where(near, 0.0, x))
        hi = np.log(np.where(near, -np.expm1(-y) + w * e, 1.0))
    return np.where(near, hi, lo)


@lru_cache(maxsize=None)
def gregory_coefficients(n):
    """Coefficients ``G_k`` of ``x/ln(1+x) = sum_k G_k x^k`` for ``k <= n``."""
    g = [Fraction(1)]
    for m in range(2, n + 2):
        acc = Fraction(0)
        for k in range(2, m + 1):
            acc += Fraction((-1) ** (k + 1), k) * g[m - k]
        g.append(-acc)
    return tuple(g)


def _nodes(h, odd_only=False):
    span = U_MAX - U_MIN
    n = int(round(span / h))
    k = np.arange(1 if odd_only else 0, n + 1, 2 if odd_only else 1)
    return U_MIN + k * h


# -- integrand construction ---------------------------------------------------


class _Integrand:
    """Reflection data for one (model, mode, a, T) evaluation."""

    def __init__(self, model: MaterialModel, a, T, mode: Mode):
        self.model = model
        self.a = a
        self.T = T
        self.mode = mode
        self.xi_per_zeta = C / (2.0 * a)

    def eps(self, zeta):
        xi = np.asarray(zeta, dtype=float) * self.xi_per_zeta
        return np.asarray(self.model.epsilon(xi, self.T), dtype=float)

    def rows(self, zeta, u):
        """Integrands in u for each zeta row (shape ``(len(zeta), len(u))``)."""
        zeta = np.asarray(zeta, dtype=float)[:, None]
        t = np.exp(u)[None, :]
        y = zeta + t
        eps = self.eps(zeta[:, 0])[:, None]
        r_tm, w_tm, r_te, w_te = fresnel_y(eps, zeta, y)
        jac = y * t
        return _Rows(jac * _log_factor(r_tm, w_tm, y), jac * _log_factor(r_te, w_te, y))

    def static_row(self, u):
        t = np.exp(u)
        y = t
        r_tm, w_tm, r_te, w_te = zero_frequency_y(self.model, y, self.a, self.T)
        if self.mode is Mode.MODIFIED_L0:
            r_tm, w_tm = modified_tm_zero_y(_background_eps0(self.model), 2.0 * self.a * _kappa(self.model, self.T), y)
        jac = y * t
        tm = np.where(w_tm == 1.0, 0.0, jac * _log_factor(r_tm, w_tm, y))
        te = np.where(w_te == 1.0, 0.0, jac * _log_factor(r_te, w_te, y))
        return _Rows(tm[None, :], te[None, :])


def _background_eps0(model):
    if isinstance(model, (DrudeModel, PlasmaModel, PerfectConductorModel)):
        return math.inf
    if isinstance(model, (OscillatorModel, DcInsulatorModel, TabulatedModel)):
        return model.eps0
    raise DomainError(f"no background permittivity for {model.kind}")


def _kappa(model, T):
    if model.carriers is None:
        raise DomainError("ModifiedL0 mode needs a carrier profile on the material model")
    return screening_kappa(model.carriers, T)


def _trapezoid(fun, tol, h=None):
    """Integrate row-wise integrands sampled on the fixed u grid.

    ``fun(u) -> _Rows``.  Returns ``(tm, te, h, err)`` where ``err`` is the
    largest row discrepancy between the last two levels.
    """
    if h is not None:
        r = fun(_nodes(h))
        return h * r.tm.sum(axis=1), h * r.te.sum(axis=1), h, 0.0
    h = H_START
    r = fun(_nodes(h))
    tm, te = h * r.tm.sum(axis=1), h * r.te.sum(axis=1)
    for _ in range(MAX_HALVINGS):
        h2 = 0.5 * h
        r = fun(_nodes(h2, odd_only=True))
        tm2 = 0.5 * tm + h2 * r.tm.sum(axis=1)
        te2 = 0.5 * te + h2 * r.te.sum(axis=1)
        err = max(np.max(np.abs(tm2 - tm) - tol * np.abs(tm2)), np.max(np.abs(te2 - te) - tol * np.abs(te2)))
        diff = max(np.max(np.abs(tm2 - tm)), np.max(np.abs(te2 - te)))
        tm, te, h = tm2, te2, h2
        if err <= 0:
            return tm, te, h, diff
    raise ConvergenceError(f"quadrature did not reach rel. tolerance {tol} at h = {h}")


def term_integrals(itg: _Integrand, zeta, tol, h=None):
    """y-integrals ``(I_TM, I_TE)`` for an array of ``zeta > 0``."""
    return _trapezoid(lambda u: itg.rows(zeta, u), tol, h)


def constant_r_integral(r, zeta=0.0, tol=1e-12):
    """``int_zeta^inf y ln(1 - r^2 e^{-y}) dy`` for a fixed reflection amplitude.

    Uses the same substitution and trapezoid levels as the Lifshitz terms.
    At ``zeta = 0`` the exact value is ``-Li3(r^2)``.
    """
    if not -1.0 <= r <= 1.0 or zeta < 0:
        raise DomainError("need |r| <= 1 and zeta >= 0")
    w = (1.0 - r) * (1.0 + r)

    def rows(u):
        t = np.exp(u)
        y = zeta + t
        v = y * t * _log_factor(r, w, y)
        return _Rows(v[None, :], np.zeros((1, u.size)))

    tm, _, _, _ = _trapezoid(rows, tol)
    return float(tm[0])


def _outer_integral(itg: _Integrand, zeta_lo, tol, h_inner, h_outer=None):
    """``int_{zeta_lo}^inf I(zeta) dzeta`` by ``zeta = zeta_lo + exp(v)``."""

    def rows(v):
        z = zeta_lo + np.exp(v)
        tm, te, _, _ = term_integrals(itg, z, tol, h_inner)
        j = np.exp(v)
        return _Rows((tm * j)[None, :], (te * j)[None, :])

    tm, te, h, err = _trapezoid(rows, tol, h_outer)
    return float(tm[0]), float(te[0]), h, err


# -- free energy --------------------------------------------------------------


def _check(g, s):
    if g.T == 0 and not s.zero_T_mode:
        raise DomainError("T = 0 requires zero_T_mode")


def _plan(g: Geometry, s: SumSettings):
    if s.l_max != "adaptive":
        return _Plan(n_explicit=s.l_max, accelerated=False)
    z1 = zeta_1(g.a, g.T)
    zeta_cut = math.log(1.0 / s.term_rel_tol) + ZETA_CUT_PAD
    need = math.ceil(zeta_cut / z1)
    if need < s.l_switch:
        return _Plan(n_explicit=need, accelerated=False)
    return _Plan(n_explicit=s.l_switch, accelerated=True)


def _zero_T(g, model, mode, s, plan):
    itg = _Integrand(model, g.a, g.T, mode)
    h_in = plan.h_inner
    if h_in is None:
        probe = np.array([1e-6, 1e-3, 0.1, 1.0, 10.0])
        _, _, h_in, _ = term_integrals(itg, probe, s.quad_rel_tol)
    tm, te, h_out, err = _outer_integral(itg, 0.0, s.quad_rel_tol, h_in, plan.h_outer)
    pref = HBAR * C / (32.0 * math.pi**2 * g.a**3)
    res = FreeEnergyResult(
        value=pref * (tm + te), l_terms_used=0, tail_estimate=pref * err,
        tm=pref * tm, te=pref * te, l0_term=0.0,
    )
    return res, replace(plan, h_inner=h_in, h_outer=h_out)


def _finite_T(g, model, mode, s, plan):
    itg = _Integrand(model, g.a, g.T, mode)
    z1 = zeta_1(g.a, g.T)
    tol = s.quad_rel_tol
    k = s.gregory_order
    n_rows = plan.n_explicit + (k + 1 if plan.accelerated else 0)
    zeta = z1 * np.arange(1, n_rows + 1)

    def all_rows(u):
        r0 = itg.static_row(u)
        r = itg.rows(zeta, u)
        return _Rows(np.vstack([r0.tm, r.tm]), np.vstack([r0.te, r.te]))

    tm, te, h_in, _ = _trapezoid(all_rows, tol, plan.h_inner)
    tm0, te0 = 0.5 * float(tm[0]), 0.5 * float(te[0])
    tm_l, te_l = tm[1:], te[1:]
    h_out = plan.h_outer
    pref = K_B * g.T / (8.0 * math.pi * g.a**2)

    if plan.accelerated:
        L = plan.n_explicit  # tail starts at l = L, i.e. row index L - 1
        gc = gregory_coefficients(k + 1)
        tail_tm, tail_te, tail_err = [], [], 0.0
        otm, ote, h_out, _ = _outer_integral(itg, L * z1, tol, h_in, h_out)
        for vals, out, integ in ((tm_l, tail_tm, otm), (te_l, tail_te, ote)):
            seg = np.asarray(vals[L - 1 : L + k + 1], dtype=float)
            out.append(integ / z1)
            d = seg.copy()
            for n in range(1, k + 2):
                corr = float(gc[n]) * d[0]
                out.append(corr)
                d = np.diff(d)
            tail_err += abs(corr)
        sum_tm = math.fsum([tm0, *tm_l[: L - 1], *tail_tm])
        sum_te = math.fsum([te0, *te_l[: L - 1], *tail_te])
        used = n_rows
        tail = pref * tail_err
    else:
        n = plan.n_explicit
        sum_tm = math.fsum([tm0, *tm_l[:n]])
        sum_te = math.fsum([te0, *te_l[:n]])
        used = n
        tail = pref * _geometric_tail(tm_l[:n] + te_l[:n])

    res = FreeEnergyResult(
        value=pref * (sum_tm + sum_te), l_terms_used=used, tail_estimate=tail,
        tm=pref * sum_tm, te=pref * sum_te, l0_term=pref * (tm0 + te0),
        accelerated=plan.accelerated,
    )
    return res, replace(plan, h_inner=h_in, h_outer=h_out)


def _geometric_tail(terms):
    if len(terms) < 2:
        return abs(float(terms[-1])) if len(terms) else 0.0
    last, prev = float(terms[-1]), float(terms[-2])
    if prev == 0.0:
        return abs(last)
    q = last / prev
    if not 0 <= q < 1:
        return math.inf
    return abs(last) * q / (1.0 - q)


def _evaluate(g, model, mode, s, plan=None):
    _check(g, s)
    mode = Mode.parse(mode)
    if s.zero_T_mode:
        return _zero_T(g, model, mode, s, plan or _Plan(0, False))
    return _finite_T(g, model, mode, s, plan or _plan(g, s))


def free_energy(g: Geometry, model: MaterialModel, mode=Mode.STANDARD, s: SumSettings | None = None):
    """Lifshitz free energy per unit area (J/m^2).

    Raises
    ------
    ConvergenceError
        when a fixed ``l_max`` leaves a tail above ``term_rel_tol``; the
        partial :class:`FreeEnergyResult` is attached.
    """
    s = s or SumSettings()
    res, _ = _evaluate(g, model, mode, s)
    if abs(res.tail_estimate) > s.term_rel_tol * abs(res.value) and res.value != 0.0:
        raise ConvergenceError(
            f"Matsubara tail {res.tail_estimate:.3e} J/m^2 exceeds tolerance after "
            f"{res.l_terms_used} terms",
            partial=res,
        )
    return res


def classical_l0(g: Geometry, model: MaterialModel, mode=Mode.STANDARD, s: SumSettings | None = None):
    """Half-weight static Matsubara term (J/m^2); the large-separation limit."""
    if not g.T > 0:
        raise DomainError("classical limit needs T > 0")
    s = s or SumSettings()
    itg = _Integrand(model, g.a, g.T, Mode.parse(mode))
    tm, te, _, _ = _trapezoid(itg.static_row, s.quad_rel_tol)
    return K_B * g.T / (16.0 * math.pi * g.a**2) * (float(tm[0]) + float(te[0]))


def _difference(f_plus, f_minus, step):
    return (f_plus - f_minus) / (2.0 * step)


def entropy_estimate(g: Geometry, model: MaterialModel, mode=Mode.STANDARD, s: SumSettings | None = None):
    """``(S, err)``: central-difference entropy and an error estimate.

    ``err`` is ``|S(dT) - S(2 dT)|``, which tracks the truncation error, plus
    the rounding floor ``NOISE_ULPS * eps * |F| / dT`` of the difference.
    """
    s = s or SumSettings()
    if not g.T > 0:
        raise DomainError("entropy needs T > 0")
    dT = s.dT_rel * g.T
    if g.T - 2 * dT <= 0 or g.T + dT == g.T:
        raise PrecisionError(f"temperature step {dT} unusable at T = {g.T}")
    mode = Mode.parse(mode)
    _, plan = _evaluate(g, model, mode, s)
    f = {}
    for m in (-2, -1, 1, 2):
        f[m] = _evaluate(Geometry(g.a, g.T + m * dT), model, mode, s, plan)[0].value
    s1 = -_difference(f[1], f[-1], dT)
    s2 = -_difference(f[2], f[-2], 2 * dT)
    noise = NOISE_ULPS * np.finfo(float).eps * max(abs(v) for v in f.values()) / dT
    return float(s1), float(abs(s1 - s2) + noise)


def entropy(g: Geometry, model: MaterialModel, mode=Mode.STANDARD, s: SumSettings | None = None):
    """Separation-dependent entropy ``-dF/dT`` at fixed ``a`` (J/(K m^2))."""
    s = s or SumSettings()
    if not g.T > 0:
        raise DomainError("entropy needs T > 0")
    dT = s.dT_rel * g.T
    if g.T - dT <= 0 or g.T + dT == g.T:
        raise PrecisionError(f"temperature step {dT} unusable at T = {g.T}")
    mode = Mode.parse(mode)
    _, plan = _evaluate(g, model, mode, s)
    fp = _evaluate(Geometry(g.a, g.T + dT), model, mode, s, plan)[0].value
    fm = _evaluate(Geometry(g.a, g.T - dT), model, mode, s, plan)[0].value
    return -_difference(fp, fm, dT)


def pressure(g: Geometry, model: MaterialModel, mode=Mode.STANDARD, s: SumSettings | None = None):
    """Casimir pressure ``-dF/da`` (N/m^2); negative means attraction."""
    s = s or SumSettings()
    da = s.da_rel * g.a
    if g.a + da == g.a:
        raise PrecisionError(f"separation step {da} underflows at a = {g.a}")
    mode = Mode.parse(mode)
    _, plan = _evaluate(g, model, mode, s)
    fp = _evaluate(Geometry(g.a + da, g.T), model, mode, s, plan)[0].value
    fm = _evaluate(Geometry(g.a - da, g.T), model, mode, s, plan)[0].value
    return -_difference(fp, fm, da)
