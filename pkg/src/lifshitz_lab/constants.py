"""CODATA constants (SI, as shipped by scipy.constants) used everywhere in the package."""

from scipy import constants as _c

HBAR = _c.hbar
C = _c.c
K_B = _c.k
E_CHARGE = _c.e
EPS_VAC = _c.epsilon_0
M_E = _c.m_e
EV = _c.electron_volt

#: Frequency in rad/s of one electron-volt of photon energy.
EV_TO_RAD_S = EV / HBAR


def ev_to_rad_s(value_ev):
    return value_ev * EV_TO_RAD_S


def rad_s_to_ev(value):
    return value / EV_TO_RAD_S


def as_dict():
    """Constants in a stable order, for output headers."""
    return {
        "hbar_J_s": HBAR,
        "c_m_s": C,
        "k_B_J_K": K_B,
        "e_C": E_CHARGE,
        "eps_vac_F_m": EPS_VAC,
        "m_e_kg": M_E,
    }
