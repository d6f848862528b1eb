import math
from dataclasses import replace

import numpy as np
import pytest

import oracles
from uwqkd.channel_model import link_budget
from uwqkd.errors import DegenerateInputError, DomainError
from uwqkd.protocol_analytics import (
    E0,
    THRESHOLDS,
    false_coincidence_rate,
    false_coincidence_rate_derivative,
    gain_bb84,
    gain_bb84_series,
    gain_bbm92,
    gain_sarg04,
    optimal_source_position,
    qber_bb84,
    qber_bbm92,
    qber_bbm92_simple,
    qber_sarg04,
)

E_DET = 0.033


def test_constants():
    assert E0 == 0.5
    assert THRESHOLDS == {"bb84": 0.11, "sarg04": 0.149, "bbm92": 0.11}


class TestGainBB84:
    def test_no_signal(self):
        assert gain_bb84(1e-5, 0.0, 1.0).q_total == 1e-5

    def test_certain_detection(self):
        assert gain_bb84(0.0, 1.0, 50.0).q_total == pytest.approx(1.0, abs=1e-15)

    def test_direct_value(self):
        g = gain_bb84(9.7e-6, 0.394, 1.0)
        assert g.q_total == pytest.approx(0.3257 + 9.7e-6, rel=1e-3)
        assert g.noise_part == 9.7e-6
        assert g.q_total == pytest.approx(g.noise_part + g.signal_part, abs=1e-16)

    @pytest.mark.parametrize("args", [(-1e-6, 0.5, 1.0), (0.0, 1.5, 1.0), (0.0, 0.5, 0.0)])
    def test_domain(self, args):
        with pytest.raises(DomainError):
            gain_bb84(*args)


class TestGainSeries:
    def test_matches_closed_form(self):
        closed = gain_bb84(1e-5, 0.5, 1.0).q_total
        assert gain_bb84_series(1e-5, 0.5, 1.0, 200) == pytest.approx(closed, rel=1e-12)

    @pytest.mark.parametrize("n", [1, 5, 50])
    def test_zero_efficiency(self, n):
        # only the y0 parts survive; they sum to y0 * P(N <= n)
        assert gain_bb84_series(1e-5, 0.0, 1.0, 400) == pytest.approx(1e-5, rel=1e-14)
        assert gain_bb84_series(1e-5, 0.0, 1.0, n) <= 1e-5 * (1 + 1e-14)

    def test_small_mu_first_order(self):
        mu, eta, y0 = 1e-12, 0.5, 1e-5
        assert gain_bb84_series(y0, eta, mu, 5) == pytest.approx(y0 + eta * mu, rel=1e-12)

    def test_monotone_convergence(self):
        closed = gain_bb84(1e-5, 0.3, 3.0).q_total
        partial = [gain_bb84_series(1e-5, 0.3, 3.0, n) for n in range(1, 40)]
        assert all(b >= a for a, b in zip(partial, partial[1:]))
        assert partial[-1] == pytest.approx(closed, rel=1e-12)

    def test_rejects_zero_terms(self):
        with pytest.raises(DomainError):
            gain_bb84_series(0.0, 0.5, 1.0, 0)


class TestGainSARG04:
    def test_no_signal(self):
        assert gain_sarg04(1e-5, 0.0, 1.0, E_DET).q_total == pytest.approx(1e-5 / 4, rel=1e-15)

    def test_certain_detection(self):
        assert gain_sarg04(0.0, 1.0, 60.0, E_DET).q_total == pytest.approx(0.25 + E_DET / 2)

    def test_direct_value(self):
        g = gain_sarg04(9.7e-6, 0.394, 1.0, E_DET)
        assert g.q_total == pytest.approx((0.25 + 0.0165) * 0.3257, rel=1e-3)


class TestGainBBM92:
    def test_double_noise_only(self):
        g = gain_bbm92(1e-5, 0.0, 0.0, 1.0)
        assert g.q_total == pytest.approx(1e-10, rel=1e-15)

    def test_no_noise(self):
        g = gain_bbm92(0.0, 0.3, 0.4, 1.0)
        assert g.p_false == 0 and g.q_total == g.p_true

    def test_direct_values(self):
        g = gain_bbm92(9.7e-6, 0.394, 0.394, 1.0)
        assert g.p_true == pytest.approx(0.1061, rel=2e-3)
        assert g.p_false == pytest.approx(6.3e-6, rel=0.01)

    def test_first_order_form(self):
        g = gain_bbm92(1e-5, 0.2, 0.3, 0.5, approx=True)
        assert g.p_true == pytest.approx(0.1 * 0.15, rel=1e-15)
        assert g.p_false == pytest.approx(1e-5 * 0.25 + 1e-10, rel=1e-14)

    def test_exact_and_first_order_differ_at_unit_mu(self):
        exact = gain_bbm92(1e-5, 0.4, 0.4, 1.0).p_true
        first = gain_bbm92(1e-5, 0.4, 0.4, 1.0, approx=True).p_true
        assert first > exact * 1.1


class TestQberBB84:
    def test_noise_limit(self):
        assert qber_bb84(1e-5, 0.0, 1.0, E_DET).qber == 0.5

    def test_detector_floor(self):
        assert qber_bb84(0.0, 0.5, 1.0, E_DET).qber == pytest.approx(E_DET, rel=1e-15)

    def test_ratio_invariant(self):
        r = qber_bb84(1e-5, 0.01, 1.0, E_DET)
        assert r.qber == pytest.approx(r.e_mu / r.gain.q_total, rel=1e-14)

    def test_degenerate(self):
        with pytest.raises(DegenerateInputError):
            qber_bb84(0.0, 0.0, 1.0, E_DET)

    @pytest.mark.parametrize("L", [1.0, 60.0, 120.0, 179.05, 220.0])
    def test_against_oracle(self, clear, sys30, L):
        lb = link_budget(0.0, L, clear, sys30)
        got = qber_bb84(lb.y0, lb.eta_B, sys30.mu, sys30.e_det).qber
        assert got == pytest.approx(float(oracles.qber_at("bb84", L)), rel=1e-11)

    def test_reference_crossing(self, clear, sys30):
        lb = link_budget(0.0, 179.05, clear, sys30)
        assert qber_bb84(lb.y0, lb.eta_B, 1.0, E_DET).qber == pytest.approx(0.11, abs=0.005)


class TestQberSARG04:
    def test_noise_limit(self):
        assert qber_sarg04(1e-5, 0.0, 1.0, E_DET).qber == 1.0

    def test_detector_floor(self):
        floor = 2 * E_DET / (1 + 2 * E_DET)
        assert qber_sarg04(0.0, 0.5, 1.0, E_DET).qber == pytest.approx(floor, rel=1e-14)
        assert floor == pytest.approx(0.0619, abs=1e-4)

    def test_detector_limited_ratio(self):
        ratio = qber_sarg04(0.0, 0.5, 1.0, E_DET).qber / qber_bb84(0.0, 0.5, 1.0, E_DET).qber
        assert ratio == pytest.approx(2 / (1 + 2 * E_DET), abs=1e-9)

    @pytest.mark.parametrize("L", [1.0, 80.0, 163.43, 200.0])
    def test_against_oracle(self, clear, sys30, L):
        lb = link_budget(0.0, L, clear, sys30)
        got = qber_sarg04(lb.y0, lb.eta_B, sys30.mu, sys30.e_det).qber
        assert got == pytest.approx(float(oracles.qber_at("sarg04", L)), rel=1e-11)

    def test_reference_crossing(self, clear, sys30):
        lb = link_budget(0.0, 163.43, clear, sys30)
        assert qber_sarg04(lb.y0, lb.eta_B, 1.0, E_DET).qber == pytest.approx(0.149, abs=0.008)


class TestQberBBM92:
    def test_no_false_coincidences(self):
        g = gain_bbm92(0.0, 0.3, 0.3, 1.0)
        assert qber_bbm92(g, E_DET).qber == pytest.approx(E_DET, rel=1e-15)

    def test_simple_against_oracle(self, water, sys30):
        lb = link_budget(1.0, 3.0, water, sys30)
        expected = oracles.qber_bbm92(oracles.noise(1), lb.eta_A, lb.eta_B, oracles.TABLE["e_det"])
        assert qber_bbm92_simple(1.0, 3.0, water, sys30).qber == pytest.approx(float(expected),
                                                                               rel=1e-11)

    def test_midpoint_minimises_qber(self, clear, sys30):
        L = 40.0
        grid = np.linspace(0, L, 41)
        values = [qber_bbm92_simple(x, L, clear, sys30).qber for x in grid]
        assert int(np.argmin(values)) == 20

    def test_source_at_alice_is_bb84_with_inflated_noise(self, clear, sys30):
        # with eta_alice = 1 the coincidence QBER equals a BB84 QBER whose
        # noise is y0 * (1 + s_B/s_A + y0/s_A), s_X the arm click probabilities
        sys = replace(sys30, eta_alice=1.0)
        lb = link_budget(0.0, 150.0, clear, sys)
        s_a, s_b = -math.expm1(-lb.eta_A), -math.expm1(-lb.eta_B)
        y_eff = lb.y0 * (1 + s_b / s_a + lb.y0 / s_a)
        expected = qber_bb84(y_eff, lb.eta_B, 1.0, sys.e_det).qber
        got = qber_bbm92_simple(0.0, 150.0, clear, sys).qber
        assert got == pytest.approx(expected, rel=1e-13)

    def test_source_at_alice_close_to_bb84(self, clear, sys30):
        sys = replace(sys30, eta_alice=1.0)
        lb = link_budget(0.0, 150.0, clear, sys)
        pm = qber_bb84(lb.y0, lb.eta_B, sys.mu, sys.e_det).qber
        got = qber_bbm92_simple(0.0, 150.0, clear, sys).qber
        assert got == pytest.approx(pm, rel=1e-3)
        assert got != pytest.approx(pm, rel=1e-14)


class TestSourcePosition:
    def test_symmetry(self, water, sys30):
        L = 12.0
        for x in (1.0, 3.5, 5.0):
            assert false_coincidence_rate(x, L, water, sys30) == pytest.approx(
                false_coincidence_rate(L - x, L, water, sys30), rel=1e-14)

    def test_stationary_midpoint(self, water, sys30):
        assert abs(false_coincidence_rate_derivative(6.0, 12.0, water, sys30)) < 1e-10

    @pytest.mark.parametrize("frac", [0.1, 0.3, 0.45, 0.7, 0.9])
    def test_derivative_finite_difference(self, water, sys30, frac):
        L = 20.0 if water.name != "turbid" else 3.0
        sys = replace(sys30, eta_bob=0.3)
        x, h = frac * L, 1e-4 * L
        fd = (false_coincidence_rate(x + h, L, water, sys)
              - false_coincidence_rate(x - h, L, water, sys)) / (2 * h)
        analytic = false_coincidence_rate_derivative(x, L, water, sys)
        assert analytic == pytest.approx(fd, rel=1e-6)

    def test_equal_efficiencies(self, water, sys30):
        assert optimal_source_position(37.0, water, sys30) == 37.0 / 2

    def test_unequal_efficiencies_grid_oracle(self, clear, sys30):
        sys = replace(sys30, eta_alice=0.5, eta_bob=0.25)
        L = 30.0
        grid = np.linspace(0, L, 10_001)
        brute = grid[np.argmin([false_coincidence_rate(x, L, clear, sys) for x in grid])]
        x_star = optimal_source_position(L, clear, sys)
        assert x_star > L / 2
        assert x_star == pytest.approx(brute, abs=L / 10_000)

    def test_boundary_minimiser_without_noise(self, clear, sys30):
        sys = replace(sys30, eta_bob=0.25, dark_count_rate=0.0, surface_irradiance=0.0)
        x = optimal_source_position(10.0, clear, sys)
        assert 0 <= x <= 10.0
        assert false_coincidence_rate(x, 10.0, clear, sys) == 0.0

    def test_domain(self, clear, sys30):
        with pytest.raises(DomainError):
            optimal_source_position(0.0, clear, sys30)
        with pytest.raises(DomainError):
            false_coincidence_rate_derivative(0.0, 5.0, clear, sys30)
