import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from lifshitz_lab.compare import pfa_sphere_force, rescale_confidence
from lifshitz_lab.materials import drude, eV, eval_permittivity, oscillator_from_eps0
from lifshitz_lab.reflection import fresnel, modified_tm_zero
from lifshitz_lab.thermo import dc_entropy_limit, polylog3

eps_s = st.floats(1.0, 1e8)
xi_s = st.floats(1e9, 1e18)
k_s = st.floats(1e3, 1e10)
level_s = st.floats(0.01, 0.9999)


@given(eps_s, xi_s, k_s)
def test_reflection_bounded_and_ordered(eps, xi, k):
    r = fresnel(eps, xi, k)
    assert 0.0 <= r.r_tm <= 1.0
    assert -1.0 <= r.r_te <= 0.0
    assert r.r_te <= r.r_tm


@given(st.floats(1.0, 12.0), k_s, st.floats(0.0, 1e6), st.floats(0.0, 1e6))
def test_modified_tm_monotone_in_kappa(eps0, k, f1, f2):
    lo, hi = sorted((f1, f2))
    r0 = (eps0 - 1) / (eps0 + 1)
    r_lo, r_hi = modified_tm_zero(eps0, lo * k, k), modified_tm_zero(eps0, hi * k, k)
    assert r0 - 1e-15 <= r_lo <= r_hi + 1e-15
    assert r_hi <= 1.0


@given(st.floats(1.0, 1e4), st.floats(1.0, 1e4))
def test_dc_limit_decreasing_in_eps0(e1, e2):
    lo, hi = sorted((e1, e2))
    assert dc_entropy_limit(5e-7, hi) <= dc_entropy_limit(5e-7, lo)
    assert dc_entropy_limit(5e-7, hi) >= 0


@settings(max_examples=50)
@given(st.floats(0.0, 0.95), st.integers(5, 60))
def test_polylog_partial_sums(z, n):
    partial = math.fsum(z**k / k**3 for k in range(1, n + 1))
    # tail bounded by a geometric series
    bound = z ** (n + 1) / (n + 1) ** 3 / (1.0 - z)
    assert partial - 1e-15 <= polylog3(z) <= partial + bound + 1e-15


@given(st.floats(1.5, 30.0), st.floats(0.1, 15.0), st.floats(0.0, 1.0))
def test_oscillator_eps_above_one_and_decreasing(eps0, w_eV, g_eV):
    xi = np.logspace(10, 18, 40)
    e = eval_permittivity(oscillator_from_eps0(eps0, eV(w_eV), eV(g_eV)), xi)
    assert np.all(e >= 1.0) and np.all(np.diff(e) <= 0)


@given(st.floats(0.5, 20.0), st.floats(1e-4, 1.0))
def test_drude_eps_above_one_and_decreasing(wp_eV, g_eV):
    xi = np.logspace(10, 18, 40)
    e = eval_permittivity(drude(eV(wp_eV), eV(g_eV)), xi)
    assert np.all(e >= 1.0) and np.all(np.diff(e) <= 0)


@given(st.floats(1e-12, 1e3), level_s, level_s)
def test_rescale_invertible(w, a, b):
    back = rescale_confidence(rescale_confidence(w, a, b), b, a)
    assert math.isclose(back, w, rel_tol=1e-12)


@given(st.floats(1e-6, 1e-2), st.floats(1e-6, 1e-2), st.floats(-1e-3, 1e-3), st.floats(0.1, 10.0))
def test_pfa_linear(R1, R2, F, c):
    assert math.isclose(pfa_sphere_force(R1 + R2, F), pfa_sphere_force(R1, F) + pfa_sphere_force(R2, F), rel_tol=1e-12, abs_tol=1e-300)
    assert math.isclose(pfa_sphere_force(R1, c * F), c * pfa_sphere_force(R1, F), rel_tol=1e-12, abs_tol=1e-300)
