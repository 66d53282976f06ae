"""Dielectric response along the imaginary frequency axis.

Every model exposes ``epsilon(xi, T)`` returning eps(i xi) for ``xi`` in rad/s
(scalar or array) at temperature ``T`` in kelvin.  Strengths, frequencies and
conductivities are in rad/s (SI angular frequency); the dc term uses the
Gaussian convention in which ``4*pi*sigma0`` carries frequency dimension::

    eps_dc(i xi, T) = eps_osc(i xi) + 4 pi sigma0(T) / xi

Screening parameters are computed in SI, which is numerically identical to the
Gaussian ``kappa_DH**2 = 4 pi e**2 n / (k_B T)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .constants import E_CHARGE, EPS_VAC, EV_TO_RAD_S, HBAR, K_B, M_E
from .errors import DomainError, RangeError

TABULATED_HEADER = ("xi_rad_s", "eps")


def _check_T(T):
    if T < 0:
        raise DomainError(f"temperature must be >= 0, got {T}")


# -- temperature laws ---------------------------------------------------------


@dataclass(frozen=True)
class RelaxationLaw:
    """Drude relaxation ``gamma(T) = gamma_res + gamma_R * (T/T_R)**p``.

    ``gamma_res = 0`` describes a perfect crystal lattice, ``gamma_res > 0`` a
    metal with impurities.  ``p = 2`` is the default; ``p = 5`` gives the
    Bloch-Grueneisen low-temperature law.
    """

    gamma_res: float = 0.0
    gamma_R: float = 0.0
    T_R: float = 300.0
    p: float = 2.0

    def __post_init__(self):
        if self.gamma_res < 0 or self.gamma_R < 0:
            raise DomainError("relaxation parameters must be >= 0")
        if self.T_R <= 0 or self.p <= 0:
            raise DomainError("T_R and p must be > 0")

    def __call__(self, T):
        _check_T(T)
        return self.gamma_res + self.gamma_R * (T / self.T_R) ** self.p

    @property
    def perfect_lattice(self):
        return self.gamma_res == 0.0

    @classmethod
    def constant(cls, gamma):
        return cls(gamma_res=gamma)


@dataclass(frozen=True)
class ConductivityLaw:
    """dc conductivity ``sigma0(T)`` in Gaussian units (rad/s).

    kinds
        ``"activation"``: ``sigma_R * exp(-delta / (k_B T))``, delta in J;
        ``"power"``: ``sigma_R * (T/T_R)**beta``;
        ``"constant"``: ``sigma_R`` at every temperature.
    """

    kind: str = "activation"
    sigma_R: float = 0.0
    delta: float = 0.0
    beta: float = 1.0
    T_R: float = 300.0

    def __post_init__(self):
        if self.kind not in ("activation", "power", "constant"):
            raise DomainError(f"unknown conductivity law {self.kind!r}")
        if self.sigma_R < 0:
            raise DomainError("sigma_R must be >= 0")
        if self.kind == "activation" and self.delta <= 0:
            raise DomainError("activation energy must be > 0")
        if self.kind == "power" and self.beta <= 0:
            raise DomainError("power-law exponent must be > 0")

    def __call__(self, T):
        _check_T(T)
        if self.kind == "constant":
            return self.sigma_R
        if T == 0:
            return 0.0
        if self.kind == "activation":
            return self.sigma_R * math.exp(-self.delta / (K_B * T))
        return self.sigma_R * (T / self.T_R) ** self.beta

    def is_positive(self, T):
        """Exact sign test; immune to underflow of the activation factor."""
        if self.sigma_R == 0:
            return False
        return self.kind == "constant" or T > 0

    @property
    def vanishes_at_zero(self):
        return self.kind != "constant" or self.sigma_R == 0


@dataclass(frozen=True)
class CarrierProfile:
    """Carrier density law ``n(T)`` (1/m^3) and screening statistics.

    kinds
        ``"constant"``: ``n0``;
        ``"power"``: ``n0 * (T/T_R)**(1 + alpha)``;
        ``"activation"``: ``n0 * exp(-delta / (k_B T))``.

    ``statistics`` is ``"MB"`` (Debye-Hueckel screening) or ``"FD"``
    (Thomas-Fermi, free-electron Fermi level with ``mass_ratio * m_e``).
    ``kappa_override`` (1/m) bypasses both formulas.
    """

    kind: str = "constant"
    n0: float = 0.0
    T_R: float = 300.0
    alpha: float = 1.0
    delta: float = 0.0
    statistics: str = "MB"
    charge: float = E_CHARGE
    mass_ratio: float = 1.0
    kappa_override: float | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "power", "activation"):
            raise DomainError(f"unknown carrier law {self.kind!r}")
        if self.statistics not in ("MB", "FD"):
            raise DomainError(f"statistics must be 'MB' or 'FD', got {self.statistics!r}")
        if self.n0 < 0:
            raise DomainError("n0 must be >= 0")
        if self.kind == "power" and self.alpha <= 0:
            raise DomainError("power-law carrier profile needs alpha > 0")
        if self.kind == "activation" and self.delta <= 0:
            raise DomainError("activation energy must be > 0")

    @property
    def vanishes_at_zero(self):
        return self.kind != "constant" or self.n0 == 0


# -- models -------------------------------------------------------------------


@dataclass(frozen=True)
class Oscillator:
    """One oscillator term ``g / (omega**2 + xi**2 + gamma*xi)``."""

    g: float
    omega: float
    gamma: float = 0.0

    def __post_init__(self):
        if self.g <= 0 or self.omega <= 0 or self.gamma < 0:
            raise DomainError("oscillator needs g > 0, omega > 0, gamma >= 0")


class MaterialModel:
    """Base class of the permittivity variants."""

    kind = "abstract"
    carriers: CarrierProfile | None = None

    def epsilon(self, xi, T=0.0):
        raise NotImplementedError

    def zero_is_infinite(self, T=0.0):
        """True when eps(i xi) diverges as xi -> 0 at temperature ``T``."""
        return False

    def with_carriers(self, carriers):
        from dataclasses import replace

        return replace(self, carriers=carriers)


@dataclass(frozen=True)
class OscillatorModel(MaterialModel):
    terms: tuple = ()
    carriers: CarrierProfile | None = None
    kind = "oscillator"

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise DomainError("oscillator model needs at least one term")

    def epsilon(self, xi, T=0.0):
        xi = np.asarray(xi, dtype=float)
        eps = np.ones_like(xi)
        for o in self.terms:
            eps = eps + o.g / (o.omega**2 + xi * xi + o.gamma * xi)
        return eps if eps.ndim else float(eps)

    @property
    def eps0(self):
        return 1.0 + sum(o.g / o.omega**2 for o in self.terms)


@dataclass(frozen=True)
class DrudeModel(MaterialModel):
    wp: float
    relaxation: RelaxationLaw = field(default_factory=RelaxationLaw)
    carriers: CarrierProfile | None = None
    kind = "drude"

    def __post_init__(self):
        if self.wp <= 0:
            raise DomainError("plasma frequency must be > 0")

    def epsilon(self, xi, T=0.0):
        gamma = self.relaxation(T)
        xi = np.asarray(xi, dtype=float)
        with np.errstate(divide="ignore"):
            eps = 1.0 + self.wp**2 / (xi * (xi + gamma))
        return eps if eps.ndim else float(eps)

    def zero_is_infinite(self, T=0.0):
        return True

    @property
    def skin_depth(self):
        from .constants import C

        return C / self.wp


@dataclass(frozen=True)
class PlasmaModel(MaterialModel):
    wp: float
    carriers: CarrierProfile | None = None
    kind = "plasma"

    def __post_init__(self):
        if self.wp <= 0:
            raise DomainError("plasma frequency must be > 0")

    def epsilon(self, xi, T=0.0):
        xi = np.asarray(xi, dtype=float)
        with np.errstate(divide="ignore"):
            eps = 1.0 + self.wp**2 / (xi * xi)
        return eps if eps.ndim else float(eps)

    def zero_is_infinite(self, T=0.0):
        return True

    @property
    def skin_depth(self):
        from .constants import C

        return C / self.wp


@dataclass(frozen=True)
class DcInsulatorModel(MaterialModel):
    base: OscillatorModel
    sigma: ConductivityLaw
    carriers: CarrierProfile | None = None
    kind = "dc_insulator"

    def epsilon(self, xi, T=0.0):
        s = self.sigma(T)
        eps = self.base.epsilon(xi, T)
        if s == 0.0:
            return eps
        xi = np.asarray(xi, dtype=float)
        with np.errstate(divide="ignore"):
            out = eps + 4.0 * math.pi * s / xi
        return out if out.ndim else float(out)

    def zero_is_infinite(self, T=0.0):
        return self.sigma.is_positive(T)

    @property
    def eps0(self):
        return self.base.eps0


@dataclass(frozen=True)
class TabulatedModel(MaterialModel):
    """eps(i xi) sampled on a strictly increasing grid.

    Interpolation is linear in ``log xi`` versus ``log(eps - 1)``; segments
    touching ``eps == 1`` or ``xi == 0`` fall back to linear interpolation.
    """

    xi: tuple
    eps: tuple
    extrapolate: bool = False
    carriers: CarrierProfile | None = None
    kind = "tabulated"

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        eps = np.asarray(self.eps, dtype=float)
        if xi.ndim != 1 or xi.shape != eps.shape or xi.size < 2:
            raise DomainError("tabulated model needs two equal-length columns of >= 2 rows")
        if np.any(np.diff(xi) <= 0) or xi[0] < 0:
            raise DomainError("tabulated xi must be >= 0 and strictly increasing")
        if np.any(eps < 1):
            raise DomainError("tabulated eps must be >= 1")
        object.__setattr__(self, "xi", tuple(map(float, xi)))
        object.__setattr__(self, "eps", tuple(map(float, eps)))

    def epsilon(self, xi, T=0.0):
        x = np.asarray(self.xi)
        e = np.asarray(self.eps)
        q = np.asarray(xi, dtype=float)
        scalar = q.ndim == 0
        q = np.atleast_1d(q)
        if not self.extrapolate and (np.any(q < x[0]) or np.any(q > x[-1])):
            raise RangeError(
                f"xi outside tabulated range [{x[0]:.6g}, {x[-1]:.6g}] rad/s"
            )
        idx = np.clip(np.searchsorted(x, q, side="right") - 1, 0, x.size - 2)
        x0, x1 = x[idx], x[idx + 1]
        e0, e1 = e[idx], e[idx + 1]
        out = np.empty_like(q)
        loglog = (x0 > 0) & (e0 > 1) & (e1 > 1) & (q > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (np.log(q) - np.log(x0)) / (np.log(x1) - np.log(x0))
            ll = 1.0 + np.exp(np.log(e0 - 1) + s * (np.log(e1 - 1) - np.log(e0 - 1)))
            lin = e0 + (q - x0) * (e1 - e0) / (x1 - x0)
        out[:] = np.where(loglog, ll, lin)
        # exact node values
        hit = np.isin(q, x)
        if np.any(hit):
            out[hit] = e[np.searchsorted(x, q[hit])]
        out = np.maximum(out, 1.0)
        return float(out[0]) if scalar else out

    @property
    def eps0(self):
        return float(self.eps[0])


@dataclass(frozen=True)
class PerfectConductorModel(MaterialModel):
    """Ideal metal: eps = infinity, |r_TM| = |r_TE| = 1 at every frequency."""

    carriers: CarrierProfile | None = None
    kind = "perfect"

    def epsilon(self, xi, T=0.0):
        xi = np.asarray(xi, dtype=float)
        out = np.full_like(xi, np.inf)
        return out if out.ndim else math.inf

    def zero_is_infinite(self, T=0.0):
        return True


# -- constructors -------------------------------------------------------------


def oscillator(terms: Sequence, carriers=None):
    """Build an oscillator model from ``Oscillator`` objects or (g, omega[, gamma]) tuples."""
    terms = tuple(t if isinstance(t, Oscillator) else Oscillator(*t) for t in terms)
    return OscillatorModel(terms=terms, carriers=carriers)


def oscillator_from_eps0(eps0, omega, gamma=0.0, carriers=None):
    """Single-oscillator model with static permittivity ``eps0``."""
    if eps0 <= 1:
        raise DomainError("eps0 must be > 1 for an oscillator model")
    return oscillator([Oscillator((eps0 - 1.0) * omega**2, omega, gamma)], carriers)


def drude(wp, gamma=0.0, relaxation=None, carriers=None):
    """Drude model; ``gamma`` is a constant relaxation unless ``relaxation`` is given."""
    if relaxation is None:
        relaxation = RelaxationLaw.constant(gamma)
    return DrudeModel(wp=wp, relaxation=relaxation, carriers=carriers)


def plasma(wp, carriers=None):
    return PlasmaModel(wp=wp, carriers=carriers)


def dc_insulator(base, sigma, carriers=None):
    return DcInsulatorModel(base=base, sigma=sigma, carriers=carriers)


def tabulated(xi, eps, extrapolate=False, carriers=None):
    return TabulatedModel(xi=tuple(xi), eps=tuple(eps), extrapolate=extrapolate, carriers=carriers)


def perfect_conductor():
    return PerfectConductorModel()


def load_tabulated(path, extrapolate=False):
    """Read a two-column ``xi_rad_s,eps`` file."""
    with open(Path(path), newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows or tuple(c.strip() for c in rows[0]) != TABULATED_HEADER:
        raise DomainError(f"{path}: first line must be 'xi_rad_s,eps'")
    xi = [float(r[0]) for r in rows[1:]]
    eps = [float(r[1]) for r in rows[1:]]
    return tabulated(xi, eps, extrapolate=extrapolate)


def save_tabulated(path, model):
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABULATED_HEADER)
        for x, e in zip(model.xi, model.eps):
            w.writerow([repr(x), repr(e)])


# -- public operations --------------------------------------------------------


def eval_permittivity(model: MaterialModel, xi, T=0.0):
    """eps(i xi) of ``model``; ``math.inf`` marks the divergent static limit.

    Raises
    ------
    DomainError
        for ``xi < 0`` or ``T < 0``.
    RangeError
        for tabulated data queried outside the table without extrapolation.
    """
    _check_T(T)
    arr = np.asarray(xi, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("xi must be >= 0")
    if arr.ndim == 0 and arr == 0:
        if model.zero_is_infinite(T):
            return math.inf
        if isinstance(model, TabulatedModel):
            return model.epsilon(0.0, T) if model.xi[0] == 0 or model.extrapolate else model.eps0
    eps = model.epsilon(arr, T)
    if arr.ndim and np.any(arr == 0) and model.zero_is_infinite(T):
        eps = np.where(arr == 0, np.inf, eps)
    return eps


def static_permittivity(model: MaterialModel, T=0.0):
    """eps(0) as a float, or ``math.inf`` when the static value diverges."""
    if model.zero_is_infinite(T):
        return math.inf
    if isinstance(model, (OscillatorModel, DcInsulatorModel, TabulatedModel)):
        return model.eps0
    raise DomainError(f"no static permittivity for {model.kind}")


def carrier_density(profile: CarrierProfile, T):
    _check_T(T)
    if profile.kind == "constant":
        return profile.n0
    if T == 0:
        return 0.0
    if profile.kind == "power":
        return profile.n0 * (T / profile.T_R) ** (1.0 + profile.alpha)
    return profile.n0 * math.exp(-profile.delta / (K_B * T))


def fermi_energy(n, mass_ratio=1.0):
    """Free-electron Fermi energy (J) for density ``n`` (1/m^3)."""
    return HBAR**2 * (3.0 * math.pi**2 * n) ** (2.0 / 3.0) / (2.0 * mass_ratio * M_E)


def screening_kappa(profile: CarrierProfile, T):
    """Inverse screening radius (1/m); ``math.inf`` flags the MB divergence at T = 0."""
    _check_T(T)
    if profile.kappa_override is not None:
        return float(profile.kappa_override)
    n = carrier_density(profile, T)
    if n == 0:
        return 0.0
    q2 = profile.charge**2
    if profile.statistics == "MB":
        if T == 0:
            return math.inf
        return math.sqrt(q2 * n / (EPS_VAC * K_B * T))
    return math.sqrt(1.5 * q2 * n / (EPS_VAC * fermi_energy(n, profile.mass_ratio)))


def eV(value):
    """Shorthand for converting eV to rad/s in model construction."""
    return value * EV_TO_RAD_S
