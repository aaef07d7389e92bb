"""Permutation-invariance definition, the mu family, and the trace-norm
suppression certificate."""

import itertools
import math

import numpy as np
import pytest

from fermicert.algebra import OperatorExpansion, SystemShape
from fermicert.fock import (DenseOperator, partial_trace_sites,
                            reduce_expansion, to_matrix, trace_norm)
from fermicert.invariance import (InvarianceReport, MuFamilyParams,
                                  check_invariance, check_invariance_dense,
                                  is_order_preserving, lemma3_bound,
                                  mu_family_state, verify_lemma3,
                                  words_up_to_degree)

TAN6 = math.tan(math.pi / 12.0)


def mask_of(shape, *indices):
    out = 0
    for site, mi in indices:
        out |= 1 << shape.bit_position(site, mi)
    return out


def order_preserving_reference(pi, mask, shape):
    """Independent predicate: decode, map, compare adjacent pairs."""
    pairs = []
    for g in range(shape.majorana_count):
        if (mask >> g) & 1:
            site, rem = divmod(g, 2 * shape.modes_per_site)
            pairs.append((pi[site], rem))
    return all(pairs[i] < pairs[i + 1] for i in range(len(pairs) - 1))


class TestOrderPreserving:
    def test_identity_always_true(self, rng):
        sh = SystemShape(4, 1)
        for mask in words_up_to_degree(sh, 3):
            assert is_order_preserving((1, 2, 3, 4), mask, sh)

    def test_swap_reverses_pair(self):
        sh = SystemShape(2, 1)
        mask = mask_of(sh, (1, 1), (2, 1))
        assert not is_order_preserving((2, 1), mask, sh)

    def test_exhaustive_table_v4(self):
        # Table-driven check against the independent predicate over every
        # permutation and every word of degree <= 3 at V = 4.
        sh = SystemShape(4, 1)
        words = list(words_up_to_degree(sh, 3))
        for perm in itertools.permutations((1, 2, 3, 4)):
            for mask in words:
                assert (is_order_preserving(perm, mask, sh)
                        == order_preserving_reference(perm, mask, sh))

    def test_cycle_example(self):
        # Cycle 1 -> 3 -> 5 (V = 6) maps sites (1, 2) to (3, 2): order
        # reversed, so the permutation is not order preserving for that
        # word; the predicate, not a guessed value, decides.
        sh = SystemShape(6, 1)
        pi = (3, 2, 5, 4, 1, 6)
        mask = mask_of(sh, (1, 1), (2, 1))
        assert (is_order_preserving(pi, mask, sh)
                == order_preserving_reference(pi, mask, sh))
        assert not is_order_preserving(pi, mask, sh)


class TestMuFamily:
    def test_mu_zero_is_maximally_mixed(self):
        state = mu_family_state(MuFamilyParams(6, 1, 0.0))
        assert state.is_close(OperatorExpansion.identity(
            SystemShape(6, 1), 1.0 / 64.0))

    def test_pair_correlators_both_orders(self):
        # tr(rho m_2 m_1) = +i tan(pi/12) and tr(rho m_1 m_2) = -i tan(pi/12).
        state = mu_family_state(MuFamilyParams(6, 1, 1.0), validate=False)
        sh = state.shape
        pair = mask_of(sh, (1, 1), (2, 1))
        assert abs(state.expectation(pair) - (-1j * TAN6)) < 1e-15
        # m2 m1 = -(m1 m2): reversed order flips the sign.
        dense = to_matrix(state).matrix
        from fermicert.fock import jw_matrix
        m1 = jw_matrix(mask_of(sh, (1, 1)), sh).matrix
        m2 = jw_matrix(mask_of(sh, (2, 1)), sh).matrix
        assert abs(np.trace(dense @ m2 @ m1) - 1j * TAN6) < 1e-12
        assert abs(np.trace(dense @ m1 @ m2) + 1j * TAN6) < 1e-12

    def test_correlators_independent_of_sites(self):
        state = mu_family_state(MuFamilyParams(6, 1, 0.5), validate=False)
        sh = state.shape
        vals = {state.expectation(mask_of(sh, (a, 1), (b, 1)))
                for a in range(1, 7) for b in range(a + 1, 7)}
        assert len(vals) == 1

    def test_positivity_gate(self):
        with pytest.raises(ValueError, match="not positive"):
            mu_family_state(MuFamilyParams(6, 1, 1.0))
        # Frozen positivity threshold: 1 / (tan(pi/12) * 5) ~ 0.7464.
        threshold = 1.0 / (TAN6 * 5.0)
        mu_family_state(MuFamilyParams(6, 1, threshold - 1e-3))
        with pytest.raises(ValueError):
            mu_family_state(MuFamilyParams(6, 1, threshold + 1e-3))

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            MuFamilyParams(1, 1, 0.5)
        with pytest.raises(ValueError):
            MuFamilyParams(6, 1, 1.5)


class TestCheckInvariance:
    def test_maximally_mixed_fully_invariant(self):
        state = mu_family_state(MuFamilyParams(6, 1, 0.0))
        rep = check_invariance(state)
        assert rep.fully_invariant
        assert rep.max_violation() == 0.0
        assert rep.full_max_violation == 0.0

    def test_mu_family_invariant_not_fully(self):
        state = mu_family_state(MuFamilyParams(6, 1, 1.0), validate=False)
        rep = check_invariance(state)
        assert rep.max_violation() < 1e-10
        assert not rep.fully_invariant
        # The sign swap costs exactly 2 tan(pi/12).
        assert abs(rep.full_max_violation - 2.0 * TAN6) < 1e-12

    def test_sampled_path_agrees(self):
        state = mu_family_state(MuFamilyParams(6, 1, 1.0), validate=False)
        rep = check_invariance(state, exhaustive=False, n_samples=4000,
                               seed=3)
        assert rep.sampled
        assert rep.max_violation() < 1e-10
        assert not rep.fully_invariant

    def test_dense_checker_matches(self):
        state = mu_family_state(MuFamilyParams(6, 1, 1.0), validate=False)
        rep = check_invariance_dense(to_matrix(state), n_samples=3000, seed=5)
        assert rep.max_violation() < 1e-10
        assert not rep.fully_invariant

    def test_channel_output_fully_invariant(self):
        state = mu_family_state(MuFamilyParams(6, 1, 1.0), validate=False)
        channel = state.even_channel()
        rep = check_invariance(channel)
        assert rep.fully_invariant
        sh = channel.shape
        # Full invariance forces the odd-odd pair correlator to vanish.
        assert channel.expectation(mask_of(sh, (1, 1), (2, 1))) == 0.0

    def test_channel_of_mu_family_is_maximally_mixed(self):
        state = mu_family_state(MuFamilyParams(6, 1, 1.0), validate=False)
        assert state.even_channel().is_close(
            OperatorExpansion.identity(SystemShape(6, 1), 1.0 / 64.0))


@pytest.fixture(scope="module")
def mu1():
    state = mu_family_state(MuFamilyParams(6, 1, 1.0), validate=False)
    return state, check_invariance(state)


class TestVerifyLemma3:
    def test_mu_zero_lhs_zero(self):
        state = mu_family_state(MuFamilyParams(6, 1, 0.0))
        rep = verify_lemma3(state, 3)
        assert rep.lhs == 0.0 and rep.passed

    def test_k2_value_and_bound(self, mu1):
        state, inv = mu1
        rep = verify_lemma3(state, 2, inv_report=inv)
        # Oracle: the reduction difference is (tan(pi/12)/4) i m1 m2 with
        # four unit eigenvalues, so the trace norm is exactly tan(pi/12).
        # (The independent eigenvalue route is asserted below.)
        assert abs(rep.lhs - TAN6) < 1e-12
        assert abs(rep.rhs - (2.0 / math.sqrt(3.0)) * 4.0 / 6.0) < 1e-12
        assert rep.rhs == pytest.approx(0.76980035891950105, abs=1e-12)
        assert rep.passed

    def test_k2_independent_eigen_oracle(self, mu1):
        state, _ = mu1
        red = to_matrix(reduce_expansion(state, [1, 2])).matrix
        channel = to_matrix(reduce_expansion(state.even_channel(), [1, 2])).matrix
        eigs = np.linalg.eigvalsh(red - channel)
        assert abs(np.sum(np.abs(eigs)) - TAN6) < 1e-12

    def test_k1_exactly_zero(self, mu1):
        state, inv = mu1
        rep = verify_lemma3(state, 1, inv_report=inv)
        assert rep.lhs == 0.0

    def test_monotone_in_k(self, mu1):
        state, inv = mu1
        values = [verify_lemma3(state, k, inv_report=inv).lhs
                  for k in range(1, 6)]
        assert all(values[i] <= values[i + 1] + 1e-12
                   for i in range(len(values) - 1))

    def test_all_k_pass_both_sizes(self):
        for V in (6, 8):
            state = mu_family_state(MuFamilyParams(V, 1, 1.0), validate=False)
            inv = check_invariance(state)
            for k in range(1, V):
                rep = verify_lemma3(state, k, inv_report=inv)
                assert rep.passed, (V, k, rep.lhs, rep.rhs)

    def test_preconditions(self, mu1):
        state, inv = mu1
        small = mu_family_state(MuFamilyParams(4, 1, 0.5), validate=False)
        with pytest.raises(ValueError, match="below the required 6"):
            verify_lemma3(small, 2)
        with pytest.raises(ValueError, match="outside"):
            verify_lemma3(state, 0, inv_report=inv)
        with pytest.raises(ValueError, match="outside"):
            verify_lemma3(state, 6, inv_report=inv)

    def test_non_invariant_state_rejected(self):
        sh = SystemShape(6, 1)
        terms = {0: 1.0 / 64.0,
                 mask_of(sh, (1, 1), (2, 1)): 0.01j}
        lopsided = OperatorExpansion(sh, terms)
        with pytest.raises(ValueError, match="not permutation invariant"):
            verify_lemma3(lopsided, 2)

    def test_reduction_site_choice_immaterial(self, mu1):
        # Permutation invariance makes the reduced-site choice irrelevant.
        state, _ = mu1
        dense = to_matrix(state)
        first = partial_trace_sites(dense, [1, 2]).matrix
        for keep in ([2, 4], [3, 6], [1, 5]):
            other = partial_trace_sites(dense, keep).matrix
            assert np.max(np.abs(first - other)) < 1e-12

    def test_bound_formula(self):
        assert lemma3_bound(6, 1, 2) == pytest.approx(0.7698003589, abs=1e-9)
        assert lemma3_bound(6, 2, 3) == pytest.approx(
            (2.0 / math.sqrt(3.0)) * 16.0 * 2.0 ** 1.5 / 6.0, abs=1e-12)
