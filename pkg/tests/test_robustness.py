import time

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pauli_selftest.qubit import anticommutator_norms, build_triple_chsh
from pauli_selftest.robustness import (NoiseModel, anticommutator_bounds, critical_theta,
                                       curve_to_csv, expected_I_werner, state_distance_bound,
                                       noisy_qubit_selftest, observable_mismatch_bound,
                                       robustness_curve, simulated_I_werner,
                                       simulated_I_werner_closed_form, worst_case_I_penalty)

# 40-digit evaluations, truncated
STATE_BOUND_AT_1E4 = 1.0591168824543142
ANTI_XY_AT_1E4 = 0.19313708498984760
PENALTY_AT_1E3 = 0.017006596701602638
THETA_AT_ONE = 0.0029280410171284785
ETA_STAR = 0.72370396667071852


class TestBounds:
    def test_state_bound(self):
        assert state_distance_bound(0) == 0
        assert state_distance_bound(1e-4) == pytest.approx(STATE_BOUND_AT_1E4, rel=1e-14)

    def test_anticommutators(self):
        assert anticommutator_bounds(1e-4)[2] == pytest.approx(ANTI_XY_AT_1E4, rel=1e-14)

    def test_negative_epsilon(self):
        with pytest.raises(ValueError):
            state_distance_bound(-1e-3)

    def test_noise_model_ranges(self):
        with pytest.raises(ValueError):
            NoiseModel(eta=1.2)
        with pytest.raises(ValueError):
            NoiseModel(theta=-1)


class TestNoisySelftest:
    def test_zero_is_ideal(self):
        s, rep = noisy_qubit_selftest(0.0)
        assert abs(rep.bell_value - 6 * np.sqrt(2)) <= 1e-10
        assert max(rep.residuals) <= 1e-10

    @given(st.floats(0, 1))
    def test_visibility_scales_bell_value(self, v):
        s, rep = noisy_qubit_selftest((1 - v) * 6 * np.sqrt(2))
        assert rep.bell_value == pytest.approx(v * 6 * np.sqrt(2), abs=1e-10)
        assert build_triple_chsh(s).value(s.state) == pytest.approx(rep.bell_value)

    @pytest.mark.parametrize("eps", [1e-2, 1e-3, 1e-4])
    def test_chain_of_bounds(self, eps):
        s, rep = noisy_qubit_selftest(eps)
        assert rep.epsilon == pytest.approx(eps, abs=1e-12)
        assert sum(r ** 2 for r in rep.residuals) == pytest.approx(2 * eps, abs=1e-8)
        assert max(rep.residuals) <= np.sqrt(2 * eps) + 1e-12
        for norm, bound in zip(anticommutator_norms(s), anticommutator_bounds(eps)):
            assert norm <= bound
        # first residual is 2^(1/4) ||(Z^C - Z^A) psi||
        assert rep.residuals[0] / 2 ** 0.25 <= observable_mismatch_bound(eps)

    def test_unreachable(self):
        with pytest.raises(ValueError):
            noisy_qubit_selftest(9.0)


class TestPenalty:
    def test_values(self):
        assert worst_case_I_penalty(0) == 0
        assert worst_case_I_penalty(1e-3) == pytest.approx(PENALTY_AT_1E3, rel=1e-13)

    def test_monotone(self):
        values = [worst_case_I_penalty(t) for t in np.linspace(0, 1, 200)]
        assert np.all(np.diff(values) > 0)


class TestWerner:
    def test_reference_values(self):
        assert expected_I_werner(1, 0.6) == pytest.approx(-0.05, abs=1e-15)
        assert expected_I_werner(0, 0.6) == pytest.approx(1 / 64, abs=1e-15)

    def test_root(self):
        assert expected_I_werner(ETA_STAR, 0.6) == pytest.approx(0, abs=1e-15)

    def test_range(self):
        with pytest.raises(ValueError):
            expected_I_werner(1.1, 0.5)

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_simulation_matches_exact_closed_form(self, eta, p):
        assert simulated_I_werner(eta, p) == pytest.approx(
            simulated_I_werner_closed_form(eta, p), abs=1e-10)

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_printed_form_differs_only_in_noise_term(self, eta, p):
        gap = simulated_I_werner_closed_form(eta, p) - expected_I_werner(eta, p)
        assert gap == pytest.approx(3 * (1 - eta) ** 2 / 64, abs=1e-15)

    @given(st.floats(0, 1))
    def test_full_visibility_agrees(self, p):
        assert simulated_I_werner(1.0, p) == pytest.approx(expected_I_werner(1.0, p), abs=1e-12)


class TestCriticalTheta:
    def test_below_threshold(self):
        assert critical_theta(0.72, 0.6) == 0.0

    def test_full_visibility(self):
        assert critical_theta(1.0, 0.6) == pytest.approx(THETA_AT_ONE, rel=1e-12)

    @given(st.floats(0.7238, 1), st.floats(0.34, 1))
    def test_solves_threshold(self, eta, p):
        theta = critical_theta(eta, p)
        if theta > 0:
            assert abs(expected_I_werner(eta, p) + worst_case_I_penalty(theta)) <= 1e-12

    def test_monotone_above_root(self):
        grid = np.linspace(ETA_STAR + 1e-6, 1, 100)
        thetas = [critical_theta(e, 0.6) for e in grid]
        assert np.all(np.diff(thetas) > 0)


class TestCurve:
    def test_three_points(self):
        pts = robustness_curve(0.6, [0.72, 0.86, 1.0])
        assert pts[0].theta_crit == 0
        assert 0 < pts[1].theta_crit < pts[2].theta_crit
        assert pts[2].theta_crit == pytest.approx(THETA_AT_ONE, rel=1e-12)

    def test_boundary_state(self):
        pts = robustness_curve(1 / 3, np.linspace(0, 1, 21))
        assert all(p.theta_crit == 0 for p in pts)

    def test_order_independent(self):
        grid = np.linspace(0.5, 1, 11)
        a = {p.eta: p for p in robustness_curve(0.6, grid)}
        b = {p.eta: p for p in robustness_curve(0.6, grid[::-1])}
        assert a == b

    def test_zero_when_nonnegative(self):
        for pt in robustness_curve(0.45, np.linspace(0, 1, 41)):
            if pt.expected_I >= 0:
                assert pt.theta_crit == 0

    def test_speed(self):
        start = time.perf_counter()
        robustness_curve(0.6, np.linspace(0, 1, 50))
        assert time.perf_counter() - start < 1

    def test_csv(self):
        text = curve_to_csv(robustness_curve(0.6, [0.5, 1.0]))
        lines = text.splitlines()
        assert lines[0] == "eta,expected_I,theta_crit"
        assert lines[2] == "1,-0.05,0.00292804101713"
