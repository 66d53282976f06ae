import math

import numpy as np
import pytest

from lifshitz_lab.constants import EPS_VAC, E_CHARGE, EV_TO_RAD_S, K_B
from lifshitz_lab.errors import DomainError, RangeError
from lifshitz_lab.materials import (
    CarrierProfile,
    ConductivityLaw,
    Oscillator,
    RelaxationLaw,
    carrier_density,
    dc_insulator,
    drude,
    eV,
    eval_permittivity,
    load_tabulated,
    oscillator,
    oscillator_from_eps0,
    perfect_conductor,
    plasma,
    save_tabulated,
    screening_kappa,
    static_permittivity,
    tabulated,
)


class TestPermittivity:
    def test_plasma_direct_substitution(self):
        assert eval_permittivity(plasma(2.0), 1.0) == 5.0

    def test_oscillator_static(self):
        m = oscillator([(3.0, 1.0, 0.0)])
        assert eval_permittivity(m, 0.0) == 4.0
        assert static_permittivity(m) == 4.0

    def test_gold_drude_at_plasma_frequency(self):
        wp, gamma = 9.0 * EV_TO_RAD_S, 0.035 * EV_TO_RAD_S
        expected = 1.0 + wp * wp / (wp * (wp + gamma))  # = 1 + 9/9.035
        assert eval_permittivity(drude(wp, gamma), wp) == pytest.approx(expected, rel=1e-15)
        assert expected == pytest.approx(1.0 + 9.0 / 9.035, rel=1e-14)

    def test_divergent_static_values(self):
        assert eval_permittivity(drude(1e16, 1e13), 0.0) == math.inf
        assert static_permittivity(drude(1e16, 1e13)) == math.inf
        assert static_permittivity(plasma(2.0)) == math.inf
        assert static_permittivity(perfect_conductor()) == math.inf

    def test_dc_insulator_static_flag_follows_sigma(self):
        osc = oscillator_from_eps0(4.0, eV(4.0))
        m = dc_insulator(osc, ConductivityLaw("activation", sigma_R=1e14, delta=0.1 * 1.602e-19))
        assert static_permittivity(m, 300.0) == math.inf
        assert static_permittivity(m, 0.0) == 4.0
        # far below the gap the factor underflows; the flag must not
        assert m.zero_is_infinite(1e-3)

    def test_array_input_with_zero(self):
        eps = eval_permittivity(drude(1e16, 1e13), np.array([0.0, 1e14]))
        assert math.isinf(eps[0]) and np.isfinite(eps[1])

    def test_negative_frequency_rejected(self):
        with pytest.raises(DomainError):
            eval_permittivity(plasma(1.0), -1.0)
        with pytest.raises(DomainError):
            eval_permittivity(plasma(1.0), 1.0, T=-1.0)

    def test_sampled_monotone_and_above_one(self):
        xi = np.logspace(10, 18, 200)
        for m in (drude(eV(9), eV(0.035)), plasma(eV(9)), oscillator_from_eps0(11.7, eV(4), eV(0.1))):
            e = eval_permittivity(m, xi, 300.0)
            assert np.all(e >= 1.0)
            assert np.all(np.diff(e) <= 0.0)

    def test_drude_tends_to_plasma(self):
        wp, xi = eV(9.0), eV(0.5)
        ep = eval_permittivity(plasma(wp), xi)
        gaps = [abs(eval_permittivity(drude(wp, f * xi), xi) - ep) for f in (1e-1, 1e-2, 1e-3)]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] / ep < 2e-3

    def test_dc_insulator_without_conductivity_is_its_oscillator(self):
        osc = oscillator([(3.0 * eV(4) ** 2, eV(4), eV(0.1)), (0.5 * eV(10) ** 2, eV(10))])
        m = dc_insulator(osc, ConductivityLaw("constant", sigma_R=0.0))
        xi = np.logspace(11, 17, 50)
        assert np.array_equal(eval_permittivity(m, xi), eval_permittivity(osc, xi))


class TestValidation:
    @pytest.mark.parametrize("args", [(0.0, 1.0), (1.0, 0.0), (1.0, 1.0, -1.0)])
    def test_bad_oscillator(self, args):
        with pytest.raises(DomainError):
            Oscillator(*args)

    def test_bad_models(self):
        with pytest.raises(DomainError):
            plasma(0.0)
        with pytest.raises(DomainError):
            oscillator([])
        with pytest.raises(DomainError):
            RelaxationLaw(gamma_res=-1.0)
        with pytest.raises(DomainError):
            ConductivityLaw("power", sigma_R=1.0, beta=0.0)
        with pytest.raises(DomainError):
            CarrierProfile("power", n0=1.0, alpha=0.0)
        with pytest.raises(DomainError):
            CarrierProfile(statistics="BE")


class TestRelaxationAndConductivity:
    def test_relaxation_law(self):
        law = RelaxationLaw(gamma_res=1.0, gamma_R=4.0, T_R=300.0, p=2.0)
        assert law(0.0) == 1.0
        assert law(150.0) == pytest.approx(2.0)
        assert not law.perfect_lattice
        assert RelaxationLaw(0.0, 4.0).perfect_lattice

    def test_conductivity_laws(self):
        act = ConductivityLaw("activation", sigma_R=1e14, delta=0.1 * 1.602e-19)
        assert act(0.0) == 0.0 and act.vanishes_at_zero
        assert act(300.0) == pytest.approx(1e14 * math.exp(-0.1 * 1.602e-19 / (K_B * 300.0)))
        pw = ConductivityLaw("power", sigma_R=2.0, beta=3.0, T_R=100.0)
        assert pw(50.0) == pytest.approx(0.25)
        const = ConductivityLaw("constant", sigma_R=5.0)
        assert const(0.0) == 5.0 and not const.vanishes_at_zero


class TestTabulated:
    def test_exact_at_nodes_and_loglog_between(self):
        xi = np.logspace(12, 16, 9)
        eps = 1.0 + 10.0 / (1.0 + xi / 1e14)
        m = tabulated(xi, eps)
        assert np.array_equal(eval_permittivity(m, xi), eps)
        mid = math.sqrt(xi[3] * xi[4])
        expected = 1.0 + math.sqrt((eps[3] - 1) * (eps[4] - 1))
        assert eval_permittivity(m, mid) == pytest.approx(expected, rel=1e-13)

    def test_out_of_range(self):
        m = tabulated([1e12, 1e13], [5.0, 3.0])
        with pytest.raises(RangeError):
            eval_permittivity(m, 1e14)
        assert eval_permittivity(tabulated([1e12, 1e13], [5.0, 3.0], extrapolate=True), 1e14) >= 1.0

    def test_invalid_tables(self):
        with pytest.raises(DomainError):
            tabulated([1.0, 1.0], [2.0, 2.0])
        with pytest.raises(DomainError):
            tabulated([1.0, 2.0], [2.0, 0.5])

    def test_file_roundtrip(self, tmp_path):
        m = tabulated([1e12, 1e13, 1e14], [5.0, 3.0, 1.5])
        path = tmp_path / "eps.csv"
        save_tabulated(path, m)
        assert path.read_text().splitlines()[0] == "xi_rad_s,eps"
        assert load_tabulated(path) == m

    def test_bad_header(self, tmp_path):
        path = tmp_path / "eps.csv"
        path.write_text("xi,eps\n1,2\n2,1.5\n")
        with pytest.raises(DomainError):
            load_tabulated(path)


class TestCarriers:
    def test_densities(self):
        assert carrier_density(CarrierProfile("constant", n0=1e20), 0.0) == 1e20
        assert carrier_density(CarrierProfile("power", n0=1e20, alpha=1.0), 0.0) == 0.0
        act = CarrierProfile("activation", n0=1e20, delta=1e-20)
        assert carrier_density(act, 0.0) == 0.0
        assert carrier_density(act, 1.0) < 1e-250
        with pytest.raises(DomainError):
            carrier_density(act, -1.0)

    def test_debye_hueckel(self):
        p = CarrierProfile("constant", n0=1e22)
        k300 = screening_kappa(p, 300.0)
        assert k300 == pytest.approx(math.sqrt(E_CHARGE**2 * 1e22 / (EPS_VAC * K_B * 300.0)))
        assert screening_kappa(p, 150.0) ** 2 == pytest.approx(2.0 * k300**2)
        assert screening_kappa(p, 0.0) == math.inf

    def test_vanishing_density(self):
        assert screening_kappa(CarrierProfile("constant", n0=0.0), 10.0) == 0.0
        p = CarrierProfile("power", n0=1e20, alpha=1.0)
        ks = [screening_kappa(p, T) ** 2 for T in (4.0, 2.0, 1.0)]
        # kappa^2 proportional to T
        assert ks[0] / ks[1] == pytest.approx(2.0) and ks[1] / ks[2] == pytest.approx(2.0)
        assert screening_kappa(p, 0.0) == 0.0

    def test_thomas_fermi_and_override(self):
        fd = CarrierProfile("constant", n0=5.9e28, statistics="FD")
        k = screening_kappa(fd, 0.0)
        # free-electron gold: screening length about 0.06 nm
        assert 1e10 < k < 3e10
        assert screening_kappa(CarrierProfile(n0=1.0, kappa_override=123.0), 1.0) == 123.0

    def test_with_carriers(self):
        osc = oscillator_from_eps0(4.0, eV(4.0))
        p = CarrierProfile(n0=1.0)
        assert osc.with_carriers(p).carriers is p
        assert osc.carriers is None
