"""Fresnel reflection coefficients on the imaginary frequency axis.

With ``q = sqrt(k**2 + xi**2/c**2)`` and ``k_m = sqrt(k**2 + eps*xi**2/c**2)``::

    r_TM = (eps*q - k_m) / (eps*q + k_m)      r_TE = (q - k_m) / (q + k_m)

The vectorised helpers work in the dimensionless variables used by the
engine, ``y = 2 a q`` and ``zeta = 2 a xi / c``, and return ``1 - r**2``
computed without cancellation alongside ``r`` itself.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .constants import C
from .errors import DomainError
from .materials import (
    DcInsulatorModel,
    DrudeModel,
    MaterialModel,
    OscillatorModel,
    PerfectConductorModel,
    PlasmaModel,
    TabulatedModel,
    static_permittivity,
)


class ReflectionPair(NamedTuple):
    r_tm: float
    r_te: float


def fresnel(eps, xi, k_perp):
    """Reflection pair for finite ``eps`` at frequency ``xi`` and wave vector ``k_perp``.

    An infinite ``eps`` is rejected; route the static limit of conducting
    models through :func:`zero_frequency_limit`.
    """
    if k_perp <= 0:
        raise DomainError("k_perp must be > 0")
    if xi < 0:
        raise DomainError("xi must be >= 0")
    if not math.isfinite(eps):
        raise DomainError("non-finite eps: use zero_frequency_limit for the static term")
    if eps < 1:
        raise DomainError("eps must be >= 1 on the imaginary axis")
    kx = xi / C
    q = math.sqrt(k_perp * k_perp + kx * kx)
    km = math.sqrt(k_perp * k_perp + eps * kx * kx)
    return ReflectionPair(
        (eps - 1.0) * ((eps + 1.0) * q * q - kx * kx) / (eps * q + km) ** 2,
        -(eps - 1.0) * kx * kx / (q + km) ** 2,
    )


def fresnel_y(eps, zeta, y):
    """Vectorised Fresnel coefficients in dimensionless variables.

    Returns ``(r_tm, 1 - r_tm**2, r_te, 1 - r_te**2)``.  ``eps`` broadcasts
    against ``y``; ``eps == inf`` yields the ideal-metal values.
    """
    eps = np.asarray(eps, dtype=float)
    inf = np.isinf(eps)
    e = np.where(inf, 1.0, eps)
    s = np.sqrt(y * y + (e - 1.0) * zeta * zeta)
    dtm = (e * y + s) ** 2
    r_tm = (e - 1.0) * ((e + 1.0) * y * y - zeta * zeta) / dtm
    w_tm = 4.0 * e * y * s / dtm
    dte = (y + s) ** 2
    r_te = -(e - 1.0) * zeta * zeta / dte
    w_te = 4.0 * y * s / dte
    if np.any(inf):
        r_tm = np.where(inf, 1.0, r_tm)
        w_tm = np.where(inf, 0.0, w_tm)
        r_te = np.where(inf, -1.0, r_te)
        w_te = np.where(inf, 0.0, w_te)
    return r_tm, w_tm, r_te, w_te


def modified_tm_zero(eps0, kappa, k_perp):
    """Screening-modified static TM coefficient.

    ``(eps0*sqrt(k**2 + kappa**2) - k) / (eps0*sqrt(k**2 + kappa**2) + k)``;
    recovers ``(eps0 - 1)/(eps0 + 1)`` at ``kappa = 0`` and tends to 1 as
    ``kappa`` grows.
    """
    if k_perp <= 0:
        raise DomainError("k_perp must be > 0")
    if eps0 < 1 or kappa < 0:
        raise DomainError("need eps0 >= 1 and kappa >= 0")
    if math.isinf(eps0) or math.isinf(kappa):
        return 1.0
    es = eps0 * math.hypot(k_perp, kappa)
    return (es - k_perp) / (es + k_perp)


def modified_tm_zero_y(eps0, kappa_2a, y):
    """Vectorised :func:`modified_tm_zero` with ``kappa_2a = 2 a kappa``; returns ``(r, 1 - r**2)``."""
    if math.isinf(eps0) or math.isinf(kappa_2a):
        return np.ones_like(y), np.zeros_like(y)
    es = eps0 * np.hypot(y, kappa_2a)
    d = (es + y) ** 2
    return (es - y) * (es + y) / d, 4.0 * es * y / d


def _static_te_plasma_y(w, y):
    """Plasma-model static TE coefficient with ``w = 2 a wp / c``."""
    s = np.sqrt(y * y + w * w)
    d = (y + s) ** 2
    return -(w * w) / d, 4.0 * y * s / d


def zero_frequency_y(model: MaterialModel, y, a, T):
    """Static (l = 0) coefficients on a ``y = 2 a k_perp`` grid.

    Returns ``(r_tm, 1 - r_tm**2, r_te, 1 - r_te**2)``.
    """
    y = np.asarray(y, dtype=float)
    one, zero = np.ones_like(y), np.zeros_like(y)
    if isinstance(model, PerfectConductorModel):
        return one, zero, -one, zero
    if isinstance(model, PlasmaModel):
        r_te, w_te = _static_te_plasma_y(2.0 * a * model.wp / C, y)
        return one, zero, r_te, w_te
    if isinstance(model, DrudeModel):
        return one, zero, zero, one
    if isinstance(model, DcInsulatorModel) and model.zero_is_infinite(T):
        return one, zero, zero, one
    eps0 = static_permittivity(model, T)
    r0 = (eps0 - 1.0) / (eps0 + 1.0)
    return r0 * one, (1.0 - r0 * r0) * one, zero, one


def zero_frequency_limit(model: MaterialModel, k_perp, T=0.0):
    """Static reflection pair ``(r_TM(0, k), r_TE(0, k))`` of ``model``."""
    if k_perp <= 0:
        raise DomainError("k_perp must be > 0")
    if isinstance(model, PlasmaModel):
        w = model.wp / C
        s = math.hypot(k_perp, w)
        return ReflectionPair(1.0, (k_perp - s) / (k_perp + s))
    if isinstance(model, PerfectConductorModel):
        return ReflectionPair(1.0, -1.0)
    if isinstance(model, (DrudeModel, DcInsulatorModel)) and model.zero_is_infinite(T):
        return ReflectionPair(1.0, 0.0)
    if isinstance(model, (OscillatorModel, DcInsulatorModel, TabulatedModel)):
        eps0 = static_permittivity(model, T)
        return ReflectionPair((eps0 - 1.0) / (eps0 + 1.0), 0.0)
    raise DomainError(f"no static limit for {model.kind}")
