import math
from statistics import NormalDist

import numpy as np
import pytest

from lifshitz_lab.compare import (
    RULE_NOTE,
    ExperimentSet,
    TheoryBand,
    exclusion_test,
    pfa_sphere_force,
    read_experiment,
    rescale_confidence,
    synth_experiment,
    theory_band,
    write_experiment,
)
from lifshitz_lab.constants import C, HBAR
from lifshitz_lab.engine import Geometry, SumSettings, free_energy
from lifshitz_lab.errors import CoverageError, DomainError
from lifshitz_lab.materials import perfect_conductor

A_GRID = tuple(np.linspace(2e-7, 7e-7, 6))


def z(level):
    return NormalDist().inv_cdf(0.5 * (1 + level))


def band(center=None, rel=0.02, level=0.95):
    c = center if center is not None else tuple(-1.0 / (a * 1e6) ** 4 for a in A_GRID)
    return TheoryBand(A_GRID, c, tuple(rel * abs(v) for v in c), level, "toy")


class TestRescale:
    def test_quantile_factors(self):
        assert rescale_confidence(1.0, 0.70, 0.95) == pytest.approx(z(0.95) / z(0.70), rel=1e-12)
        assert rescale_confidence(1.0, 0.95, 0.999) == pytest.approx(z(0.999) / z(0.95), rel=1e-12)
        assert abs(rescale_confidence(1.0, 0.70, 0.95) - 1.891) < 1e-3
        assert abs(rescale_confidence(1.0, 0.95, 0.999) - 1.679) < 1e-3

    @pytest.mark.parametrize("lv", [(0.5, 0.99), (0.7, 0.95), (0.95, 0.999999)])
    def test_invertible_and_multiplicative(self, lv):
        lo, hi = lv
        w = 3.7e-4
        assert rescale_confidence(rescale_confidence(w, lo, hi), hi, lo) == pytest.approx(w, rel=1e-12)
        assert rescale_confidence(2 * w, lo, hi) == pytest.approx(2 * rescale_confidence(w, lo, hi), rel=1e-15)
        mid = 0.9
        two_step = rescale_confidence(rescale_confidence(w, lo, mid), mid, hi)
        assert two_step == pytest.approx(rescale_confidence(w, lo, hi), rel=1e-12)

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, 1.5])
    def test_levels_validated(self, bad):
        with pytest.raises(DomainError):
            rescale_confidence(1.0, bad, 0.95)


class TestPFA:
    def test_linear(self):
        assert pfa_sphere_force(2e-4, -3e-9) == pytest.approx(2 * pfa_sphere_force(1e-4, -3e-9), rel=1e-15)
        assert pfa_sphere_force(1e-4, -6e-9) == pytest.approx(2 * pfa_sphere_force(1e-4, -3e-9), rel=1e-15)

    def test_ideal_metal_force(self):
        a, R = 1e-6, 1e-4
        F = free_energy(Geometry(a, 0.0), perfect_conductor(), s=SumSettings(zero_T_mode=True)).value
        assert pfa_sphere_force(R, F, a) == pytest.approx(-math.pi**3 * HBAR * C * R / (360 * a**3), rel=1e-10)

    def test_warns_for_large_separation(self):
        with pytest.warns(UserWarning):
            pfa_sphere_force(1e-5, -1.0, a=1e-6)
        with pytest.raises(DomainError):
            pfa_sphere_force(0.0, -1.0)


class TestExclusion:
    def test_exact_band_is_consistent(self):
        b = band()
        data = ExperimentSet(b.a, b.center, tuple(0.01 * abs(c) for c in b.center), 0.95)
        rep = exclusion_test(data, b)
        assert rep.aggregate == "Consistent"
        assert set(rep.per_point) == {"Consistent"}
        assert rep.rule == RULE_NOTE

    def test_large_offset_is_excluded(self):
        b = band()
        data = ExperimentSet(b.a, tuple(10 * c for c in b.center), tuple(0.01 * abs(c) for c in b.center), 0.95)
        rep = exclusion_test(data, b)
        assert rep.aggregate == "Excluded"
        assert all(d > w for d, w in zip(rep.deviation, rep.allowed))

    def test_isolated_exclusion_is_inconclusive(self):
        b = band()
        vals = list(b.center)
        vals[2] *= 2
        data = ExperimentSet(b.a, vals, tuple(0.01 * abs(c) for c in b.center), 0.95)
        assert exclusion_test(data, b).aggregate == "Inconclusive"

    def test_windows(self):
        b = band()
        vals = [c * (5 if i < 3 else 1) for i, c in enumerate(b.center)]
        data = ExperimentSet(b.a, vals, tuple(0.01 * abs(c) for c in b.center), 0.95)
        # three of six excluded is not a majority over the whole range
        assert exclusion_test(data, b).aggregate == "Inconclusive"
        assert exclusion_test(data, b, windows=[(A_GRID[0], A_GRID[2])]).aggregate == "Excluded"

    def test_no_overlap(self):
        b = band()
        data = ExperimentSet((1e-5, 2e-5), (1.0, 1.0), (0.1, 0.1), 0.95)
        with pytest.raises(CoverageError):
            exclusion_test(data, b)

    def test_partial_overlap_warns(self):
        b = band()
        data = ExperimentSet((A_GRID[1], 1e-5), (b.center[1], 1.0), (0.1, 0.1), 0.95)
        with pytest.warns(UserWarning):
            rep = exclusion_test(data, b)
        assert rep.a == (A_GRID[1],)

    def test_invariant_under_common_rescaling(self):
        b = band(rel=0.01, level=0.68)
        rng = np.random.default_rng(7)
        vals = tuple(c * (1 + 0.03 * rng.standard_normal()) for c in b.center)
        data = ExperimentSet(b.a, vals, tuple(0.015 * abs(c) for c in b.center), 0.9)
        for level in (0.68, 0.95, 0.999):
            ref = exclusion_test(data, b, level=level)
            moved = exclusion_test(data.at_level(0.5), b.at_level(0.8), level=level)
            assert moved.per_point == ref.per_point
            assert moved.aggregate == ref.aggregate

    def test_report_dict(self):
        b = band()
        rep = exclusion_test(synth_experiment(b, 0.01, 0.95, seed=1), b)
        d = rep.to_dict()
        assert d["aggregate"] == rep.aggregate and d["level"] == 0.95
        assert len(d["per_point"]) == len(d["a_m"]) == len(A_GRID)


class TestSynthetic:
    def test_zero_error_gives_centers(self):
        b = band()
        data = synth_experiment(b, 0.0, 0.95, seed=3)
        assert data.value == b.center
        assert all(w == 0 for w in data.half_width)

    def test_deterministic(self):
        b = band()
        assert synth_experiment(b, 0.05, 0.95, seed=11) == synth_experiment(b, 0.05, 0.95, seed=11)
        assert synth_experiment(b, 0.05, 0.95, seed=11) != synth_experiment(b, 0.05, 0.95, seed=12)

    def test_coverage_monte_carlo(self):
        a = tuple(np.linspace(1e-7, 1e-6, 100))
        b = TheoryBand(a, tuple(-1.0 - x * 1e6 for x in a), (0.0,) * 100, 0.95)
        inside = total = 0
        for seed in range(100):
            d = synth_experiment(b, 0.02, 0.95, seed=seed)
            dev = np.abs(np.subtract(d.value, b.center))
            inside += int(np.sum(dev <= np.asarray(d.half_width)))
            total += dev.size
        assert total == 10_000
        assert abs(inside / total - 0.95) <= 0.02

    def test_bad_rel_error(self):
        with pytest.raises(DomainError):
            synth_experiment(band(), -0.1, 0.95, seed=0)


class TestFiles:
    def test_roundtrip(self, tmp_path):
        b = band()
        data = synth_experiment(b, 0.03, 0.9, seed=5, observable="force")
        path = tmp_path / "exp.csv"
        write_experiment(path, data)
        assert path.read_text().splitlines()[2] == "a_m,value,half_width"
        assert read_experiment(path) == data

    def test_missing_level(self, tmp_path):
        path = tmp_path / "exp.csv"
        path.write_text("a_m,value,half_width\n1e-7,1,0.1\n")
        with pytest.raises(DomainError):
            read_experiment(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "exp.csv"
        path.write_text("#level=0.95\na,value,err\n1e-7,1,0.1\n")
        with pytest.raises(DomainError):
            read_experiment(path)


class TestBand:
    def test_perfect_conductor_pressure_band(self):
        a = (1e-6, 2e-6)
        b = theory_band(perfect_conductor(), a, 0.0, s=SumSettings(zero_T_mode=True), rel_half_width=0.01)
        for x, p, w in zip(b.a, b.center, b.half_width):
            ideal = -math.pi**2 * HBAR * C / (240 * x**4)
            assert p == pytest.approx(ideal, rel=1e-7)
            assert w == pytest.approx(0.01 * abs(p), rel=1e-14)
        assert b.provenance == "perfect/Standard"

    def test_sphere_needs_radius(self):
        with pytest.raises(DomainError):
            theory_band(perfect_conductor(), (1e-6, 2e-6), 300.0, observable="force")

    def test_band_validation(self):
        with pytest.raises(DomainError):
            TheoryBand((1e-6,), (1.0,), (0.0,), 0.95)
        with pytest.raises(DomainError):
            TheoryBand((2e-6, 1e-6), (1.0, 1.0), (0.0, 0.0), 0.95)
