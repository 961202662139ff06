import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pauli_selftest.certification import isotropic_witness, swap_witness
from pauli_selftest.linalg import kron
from pauli_selftest.objects import (DIAMOND, FILLED_DIAMOND, MeasurementFamily, bell_state,
                                    correlation_table, direct_sum, ideal_qubit_strategy,
                                    max_entangled, parallel_strategy, pauli,
                                    pauli_projector, projector, qubit_strategy,
                                    transpose_strategy, werner_purification, werner_state,
                                    werner_strategy)
from pauli_selftest.linalg import partial_trace

from conftest import random_observable, random_state

S = {k: pauli(k) for k in "xyz"}


class TestPaulis:
    @pytest.mark.parametrize("i,j", list(itertools.product("xyz", repeat=2)))
    def test_anticommutation(self, i, j):
        anti = S[i] @ S[j] + S[j] @ S[i]
        assert np.max(np.abs(anti - 2 * (i == j) * np.eye(2))) <= 1e-15

    def test_projector_z_plus(self):
        np.testing.assert_array_equal(pauli_projector(1, 1), np.diag([1, 0]))

    def test_projector_y_minus(self):
        expected = 0.5 * np.array([[1, 1j], [-1j, 1]])
        np.testing.assert_allclose(pauli_projector(-1, 3), expected, atol=1e-15)

    @pytest.mark.parametrize("z", [1, 2, 3])
    def test_projectors_resolve(self, z):
        plus, minus = pauli_projector(1, z), pauli_projector(-1, z)
        np.testing.assert_allclose(plus + minus, np.eye(2))
        np.testing.assert_allclose(plus - minus, pauli(z))
        assert np.linalg.matrix_rank(plus) == 1

    def test_bad_labels(self):
        with pytest.raises(ValueError):
            pauli_projector(0, 1)
        with pytest.raises(ValueError):
            pauli_projector(1, 4)


class TestStates:
    def test_phi_plus(self):
        np.testing.assert_allclose(bell_state(0), np.array([1, 0, 0, 1]) / np.sqrt(2))

    def test_bell_orthonormal(self):
        gram = np.array([[np.vdot(bell_state(j), bell_state(k)) for k in range(4)]
                         for j in range(4)])
        np.testing.assert_allclose(gram, np.eye(4), atol=1e-15)

    def test_max_entangled_four_is_two_pairs(self):
        # factor order (C1, C2, A1, A2) against Phi+_{C1A1} Phi+_{C2A2}
        pairs = np.kron(bell_state(0), bell_state(0)).reshape(2, 2, 2, 2)
        reordered = pairs.transpose(0, 2, 1, 3).reshape(-1)
        np.testing.assert_allclose(max_entangled(4), reordered, atol=1e-15)

    @pytest.mark.parametrize("d", [2, 3, 4, 8])
    def test_schmidt_coefficients(self, d):
        s = np.linalg.svd(max_entangled(d).reshape(d, d), compute_uv=False)
        np.testing.assert_allclose(s, np.full(d, 1 / np.sqrt(d)), atol=1e-14)

    def test_werner_endpoints(self):
        np.testing.assert_allclose(werner_state(0), np.eye(4) / 4)
        np.testing.assert_allclose(werner_state(1), projector(bell_state(0)))

    @given(st.floats(0, 1))
    def test_werner_is_state(self, p):
        rho = werner_state(p)
        assert np.trace(rho).real == pytest.approx(1.0)
        np.testing.assert_allclose(rho, rho.conj().T)
        assert np.linalg.eigvalsh(rho)[0] >= -1e-12

    @given(st.floats(0, 1))
    def test_witness_value_on_werner(self, p):
        assert np.trace(isotropic_witness(1) @ werner_state(p)).real == pytest.approx(
            1 - 3 * p, abs=1e-12)

    def test_swap_witness_detects_singlet_not_phi_plus(self):
        # the literal 1 + XX + YY + ZZ is negative only on the singlet
        assert np.trace(swap_witness() @ projector(bell_state(0))).real == pytest.approx(2)
        assert np.trace(swap_witness() @ projector(bell_state(3))).real == pytest.approx(-2)

    def test_werner_range(self):
        with pytest.raises(ValueError):
            werner_state(1.5)

    def test_purification_marginal(self):
        v = 0.7
        psi = werner_purification(v)
        rho = partial_trace(projector(psi), [0, 3], (2,) * 6)
        np.testing.assert_allclose(rho, werner_state(v), atol=1e-14)

    def test_bell_correlation_signs(self):
        phi = bell_state(0)
        for k, sign in (("x", 1), ("y", -1), ("z", 1)):
            assert np.vdot(phi, kron(S[k], S[k]) @ phi).real == pytest.approx(sign)


class TestIdealStrategy:
    def test_observables(self):
        s = ideal_qubit_strategy()
        np.testing.assert_allclose(s.charlie.observable(1), S["z"])
        np.testing.assert_allclose(s.alice.observable(1), (S["z"] + S["x"]) / np.sqrt(2))
        np.testing.assert_allclose(s.alice.observable(6), (S["x"] - S["y"]) / np.sqrt(2))
        np.testing.assert_allclose(s.state, bell_state(0))

    def test_all_observables_square_to_identity(self):
        s = ideal_qubit_strategy()
        for fam in (s.charlie, s.alice):
            for k in fam.settings:
                o = fam.observable(k)
                np.testing.assert_allclose(o @ o, np.eye(2), atol=1e-15)

    def test_families_valid(self):
        s = ideal_qubit_strategy()
        s.charlie.check()
        s.alice.check()
        assert s.alice.settings == (1, 2, 3, 4, 5, 6)

    def test_invalid_family_detected(self):
        fam = MeasurementFamily.from_effects({1: {0: np.diag([1.0, 0.5])}})
        with pytest.raises(ValueError):
            fam.check()
        fam = MeasurementFamily.from_effects({1: {0: np.diag([1.5, 1.0]),
                                                  1: np.diag([-0.5, 0.0])}})
        with pytest.raises(ValueError):
            fam.check()


class TestParallelStrategy:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_families_valid(self, n):
        s = parallel_strategy(n)
        s.charlie.check()
        s.alice.check(settings=[DIAMOND, FILLED_DIAMOND] + list(s.alice.settings[:12]))
        assert len(s.charlie.settings) == 3 ** n
        assert len(s.alice.settings) == 6 ** n + 2
        assert all(len(s.charlie.outcomes(z)) == 2 ** n for z in s.charlie.settings)

    def test_single_copy_matches_qubit_strategy(self):
        s, q = parallel_strategy(1), ideal_qubit_strategy()
        for k in range(1, 4):
            np.testing.assert_allclose(s.charlie.observable((k,), sign=lambda c: c[0]),
                                       q.charlie.observable(k))
        for k in range(1, 7):
            np.testing.assert_allclose(s.alice.observable((k,), sign=lambda c: c[0]),
                                       q.alice.observable(k))
        for label in (DIAMOND, FILLED_DIAMOND):
            assert s.alice.outcomes(label) == ((),)
            np.testing.assert_allclose(s.alice.effect(label, ()), np.eye(2))

    def test_two_copy_bsm(self):
        s = parallel_strategy(2)
        for a in range(4):
            np.testing.assert_allclose(s.alice.effect(DIAMOND, (a,)),
                                       projector(bell_state(a)))
        total = sum(s.alice.effects(DIAMOND).values())
        np.testing.assert_allclose(total, np.eye(4), atol=1e-15)
        assert s.alice.outcomes(FILLED_DIAMOND) == ((),)

    def test_three_copy_shifted_bsm(self):
        s = parallel_strategy(3)
        np.testing.assert_allclose(s.alice.effect(FILLED_DIAMOND, (2,)),
                                   kron(np.eye(2), projector(bell_state(2))))
        np.testing.assert_allclose(s.alice.effect(DIAMOND, (1,)),
                                   kron(projector(bell_state(1)), np.eye(2)))

    def test_four_copies_pair_counts(self):
        s = parallel_strategy(4)
        assert len(s.alice.outcomes(DIAMOND)) == 16
        assert len(s.alice.outcomes(FILLED_DIAMOND)) == 4

    def test_product_effect(self):
        s = parallel_strategy(2)
        np.testing.assert_allclose(s.charlie.effect((1, 3), (1, -1)),
                                   kron(pauli_projector(1, 1), pauli_projector(-1, 3)))

    def test_range(self):
        with pytest.raises(ValueError):
            parallel_strategy(5)


class TestTranspose:
    def test_sigma_y_flips(self):
        t = transpose_strategy(ideal_qubit_strategy())
        np.testing.assert_allclose(t.charlie.observable(3), -S["y"])
        np.testing.assert_allclose(t.charlie.observable(1), S["z"])
        np.testing.assert_allclose(t.charlie.observable(2), S["x"])

    def test_rejects_complex_state(self):
        s = ideal_qubit_strategy()
        bad = qubit_strategy(np.array([1, 0, 0, 1j]) / np.sqrt(2),
                             {k: s.charlie.observable(k) for k in s.charlie.settings},
                             {k: s.alice.observable(k) for k in s.alice.settings})
        with pytest.raises(ValueError):
            transpose_strategy(bad)

    @pytest.mark.parametrize("build", [
        ideal_qubit_strategy,
        lambda: werner_strategy(0.8),
        lambda: parallel_strategy(2),
        lambda: parallel_strategy(2, transposed_sites=(1,)),
        lambda: direct_sum(ideal_qubit_strategy(), transpose_strategy(ideal_qubit_strategy())),
    ])
    def test_correlations_invariant(self, build):
        s = build()
        a, b = correlation_table(s), correlation_table(transpose_strategy(s))
        assert a.keys() == b.keys()
        assert max(abs(a[k] - b[k]) for k in a) <= 1e-12

    def test_random_real_strategy(self):
        rng = np.random.default_rng(11)
        psi = rng.normal(size=16)
        psi /= np.linalg.norm(psi)
        s = qubit_strategy(psi, {k: random_observable(rng, 4) for k in (1, 2, 3)},
                           {k: random_observable(rng, 4) for k in range(1, 7)},
                           c_dims=(4,), a_dims=(4,))
        a, b = correlation_table(s), correlation_table(transpose_strategy(s))
        assert max(abs(a[k] - b[k]) for k in a) <= 1e-12


class TestStrategy:
    def test_probabilities_normalized(self):
        s = parallel_strategy(2)
        table = correlation_table(s)
        for z in s.charlie.settings[:3]:
            for x in (DIAMOND, (1, 4)):
                total = sum(v for (zz, xx, _, _), v in table.items() if zz == z and xx == x)
                assert total == pytest.approx(1.0)

    def test_density_and_vector_agree(self):
        rng = np.random.default_rng(2)
        psi = random_state(rng, 4)
        s = qubit_strategy(psi, {1: S["z"]}, {1: S["x"]})
        m = qubit_strategy(projector(psi), {1: S["z"]}, {1: S["x"]})
        assert s.expectation(S["z"], S["x"]) == pytest.approx(m.expectation(S["z"], S["x"]))

    def test_direct_sum_marginals(self):
        s = direct_sum(ideal_qubit_strategy(), ideal_qubit_strategy(), weight=0.3)
        assert s.c_dims == (2, 2)
        assert np.linalg.norm(s.state) == pytest.approx(1.0)
        assert s.probability(1, 1, 1, 1) == pytest.approx(
            ideal_qubit_strategy().probability(1, 1, 1, 1))
