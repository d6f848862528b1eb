import math
from dataclasses import replace

import numpy as np
import pytest

import oracles
from uwqkd.channel_model import (
    BOLTZMANN,
    PLANCK,
    SPEED_OF_LIGHT,
    WATER_PROFILES,
    WaterProfile,
    attenuation,
    correction_factor,
    irradiance,
    link_budget,
    noise_probability,
    noise_terms,
    solid_angle,
)
from uwqkd.errors import DomainError, NoiseWarning


def test_codata_constants():
    assert PLANCK == 6.62607015e-34
    assert SPEED_OF_LIGHT == 299792458.0
    assert BOLTZMANN == 1.380649e-23


class TestAttenuation:
    def test_unity_at_zero(self, water, sys30):
        assert attenuation(0.0, water, sys30) == 1.0

    def test_clear_100m_matches_oracle(self, clear, sys30):
        expected = float(oracles.transmittance(100, "clear"))
        assert attenuation(100.0, clear, sys30) == pytest.approx(expected, rel=1e-13)
        assert attenuation(100.0, clear, sys30) == pytest.approx(2.5e-3, rel=0.05)

    @pytest.mark.parametrize("pupil", [0.05, 0.10, 0.20, 0.30])
    @pytest.mark.parametrize("L", [0.5, 7.0, 42.0, 180.0])
    def test_against_oracle_all_pupils(self, water, pupil, L):
        from uwqkd.config import default_system
        sys = default_system(pupil)
        expected = float(oracles.transmittance(L, water.name, pupil))
        assert attenuation(L, water, sys) == pytest.approx(expected, rel=1e-12)

    def test_strictly_decreasing_grid(self, water, sys30):
        grid = np.linspace(0.0, 200.0, 150)
        values = [attenuation(L, water, sys30) for L in grid]
        assert all(0 <= v <= 1 for v in values)
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_negative_distance_rejected(self, clear, sys30):
        with pytest.raises(DomainError):
            attenuation(-1.0, clear, sys30)


class TestCorrectionFactor:
    @pytest.mark.parametrize("pupil,T", [(0.05, 0.13), (0.10, 0.16), (0.20, 0.21), (0.30, 0.26)])
    def test_table(self, pupil, T):
        assert correction_factor(pupil) == T

    def test_untabulated_pupil_rejected(self):
        with pytest.raises(DomainError, match="t_corr"):
            correction_factor(0.15)


class TestIrradiance:
    def test_surface(self):
        assert irradiance(0.0, 125.0, 0.08) == 125.0

    def test_scenario1_depth80(self):
        assert irradiance(80, 1e-3, 0.08) == pytest.approx(1e-3 * math.exp(-6.4), rel=1e-15)
        assert irradiance(80, 1e-3, 0.08) == pytest.approx(1.66e-6, rel=0.01)

    def test_scenario5_depth80(self):
        assert irradiance(80, 500, 0.08) == pytest.approx(0.83, rel=0.01)

    def test_negative_depth(self):
        with pytest.raises(DomainError):
            irradiance(-1, 1, 0.08)


class TestSolidAngle:
    def test_hemisphere(self):
        assert solid_angle(math.pi) == pytest.approx(2 * math.pi, abs=1e-15)

    def test_closed(self):
        assert solid_angle(0.0) == 0.0

    def test_sixty_degrees(self):
        assert solid_angle(math.radians(60)) == pytest.approx(0.8418, abs=1e-4)

    @pytest.mark.parametrize("delta", [-0.1, 2 * math.pi + 1e-9])
    def test_out_of_range(self, delta):
        with pytest.raises(DomainError):
            solid_angle(delta)


class TestNoise:
    def test_dark_term(self, sys30):
        assert noise_terms(sys30).dark == pytest.approx(9.6e-6, rel=1e-14)

    def test_scenario1_matches_oracle(self, sys30):
        y0 = noise_probability(sys30)
        assert y0 == pytest.approx(float(oracles.noise(1)), rel=1e-12)
        assert y0 == pytest.approx(9.7e-6, rel=0.01)
        terms = noise_terms(sys30)
        assert terms.dark > terms.background

    @pytest.mark.parametrize("scenario", [2, 3, 4, 5])
    def test_other_scenarios(self, scenario):
        from uwqkd.config import default_system
        sys = default_system(0.30, scenario)
        assert noise_probability(sys) == pytest.approx(float(oracles.noise(scenario)), rel=1e-12)

    def test_no_sources(self, sys30):
        quiet = replace(sys30, surface_irradiance=0.0, dark_count_rate=0.0)
        assert noise_probability(quiet) == 0.0

    def test_warns_when_not_small(self, sys30):
        loud = replace(sys30, surface_irradiance=1e9, k_inf=0.0)
        with pytest.warns(NoiseWarning):
            assert noise_probability(loud) >= 1


class TestLinkBudget:
    def test_source_at_alice(self, clear, sys30):
        lb = link_budget(0.0, 100.0, clear, sys30)
        assert lb.A_alice == 1.0
        assert lb.eta_A == sys30.eta_alice
        assert lb.eta_B == pytest.approx(0.5 * float(oracles.transmittance(100)), rel=1e-12)

    def test_midpoint_ratio(self, water, sys30):
        lb = link_budget(5.0, 10.0, water, sys30)
        assert lb.eta_A / lb.eta_B == pytest.approx(sys30.eta_alice / sys30.eta_bob, rel=1e-15)

    def test_swap(self, water, sys30):
        a = link_budget(3.0, 10.0, water, sys30)
        b = link_budget(7.0, 10.0, water, sys30)
        assert (a.eta_A, a.eta_B) == (b.eta_B, b.eta_A)

    @pytest.mark.parametrize("x", [-0.1, 10.1])
    def test_source_outside_link(self, clear, sys30, x):
        with pytest.raises(DomainError):
            link_budget(x, 10.0, clear, sys30)


class TestValidation:
    def test_water_profiles(self):
        assert WATER_PROFILES["coastal"].alpha == 0.339
        with pytest.raises(DomainError):
            WaterProfile("clear", 0.0, 1e-6)
        with pytest.raises(DomainError):
            WaterProfile("muddy", 1.0, 1e-6)

    @pytest.mark.parametrize("field,value", [("e_det", 0.5), ("eta_bob", 1.2), ("t_corr", 1.0),
                                             ("theta", 0.0), ("mu", -1.0)])
    def test_system_invariants(self, sys30, field, value):
        with pytest.raises(DomainError):
            replace(sys30, **{field: value})
