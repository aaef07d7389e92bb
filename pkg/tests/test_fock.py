"""Dense Fock-space numerics: JW matrices, conversions, reductions,
spectral helpers and state checks."""

import math

import numpy as np
import pytest

from conftest import (independent_majoranas, random_density_matrix,
                      random_even_density_matrix, word_matrix_oracle)
from fermicert.algebra import OperatorExpansion, SystemShape, random_expansion
from fermicert.errors import ResourceCapError
from fermicert.fock import (DenseOperator, check_state, expectation_word_dense,
                            global_parity_signs, hermitian_eig, jw_matrix,
                            matrix_from_text, matrix_to_text, operator_norm,
                            partial_trace_sites, permutation_unitary,
                            reduce_expansion, to_expansion, to_matrix,
                            trace_norm, word_coefficient)
from fermicert.invariance import MuFamilyParams, mu_family_state

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def mask_of(shape, *indices):
    out = 0
    for site, mi in indices:
        out |= 1 << shape.bit_position(site, mi)
    return out


class TestJwMatrix:
    def test_identity_word(self):
        sh = SystemShape(1, 1)
        assert np.allclose(jw_matrix(0, sh).matrix, np.eye(2))

    def test_first_majorana_is_x(self):
        sh = SystemShape(1, 1)
        assert np.allclose(jw_matrix(1, sh).matrix, X)

    def test_string_on_second_site(self):
        sh = SystemShape(2, 1)
        m = jw_matrix(mask_of(sh, (2, 1)), sh).matrix
        assert np.allclose(m, np.kron(Z, X))

    def test_anticommutators_exact(self):
        sh = SystemShape(2, 2)
        n = sh.majorana_count
        mats = [jw_matrix(1 << g, sh).matrix for g in range(n)]
        for i in range(n):
            for j in range(n):
                anti = mats[i] @ mats[j] + mats[j] @ mats[i]
                want = 2.0 * np.eye(sh.fock_dim) if i == j else 0.0
                assert np.max(np.abs(anti - want)) == 0.0

    def test_unitary_words(self):
        sh = SystemShape(2, 1)
        for mask in range(16):
            m = jw_matrix(mask, sh).matrix
            assert np.allclose(m @ m.conj().T, np.eye(4))

    def test_cap_enforced(self):
        with pytest.raises(ResourceCapError):
            jw_matrix(0, SystemShape(13, 1))

    def test_cap_override(self):
        m = jw_matrix(0, SystemShape(13, 1), override_cap=True)
        assert m.dim == 2 ** 13


class TestConversions:
    def test_identity_roundtrip(self):
        sh = SystemShape(2, 1)
        ident = OperatorExpansion.identity(sh, 1.0 / sh.fock_dim)
        back = to_expansion(to_matrix(ident))
        assert back.is_close(ident)

    def test_random_roundtrip(self, rng):
        for sh in (SystemShape(2, 1), SystemShape(2, 2), SystemShape(4, 1)):
            a = random_expansion(sh, rng, n_terms=6)
            back = to_expansion(to_matrix(a))
            assert back.max_coeff_diff(a) < 1e-12

    def test_word_coefficient_orthogonality(self, rng):
        sh = SystemShape(2, 1)
        a = random_expansion(sh, rng, n_terms=5)
        dense = to_matrix(a).matrix
        for mask, coeff in a.terms.items():
            assert abs(word_coefficient(dense, mask, sh) - coeff) < 1e-12

    def test_mu_family_trace_one(self):
        state = mu_family_state(MuFamilyParams(6, 1, 1.0), validate=False)
        dense = to_matrix(state)
        assert abs(np.trace(dense.matrix) - 1.0) < 1e-12


class TestPartialTrace:
    def test_product_reduces_to_factor(self, rng):
        sh1 = SystemShape(1, 1)
        xi = random_even_density_matrix(sh1, rng)
        big = DenseOperator(SystemShape(2, 1), np.kron(xi, xi))
        red = partial_trace_sites(big, [1])
        assert np.max(np.abs(red.matrix - xi)) < 1e-12

    def test_trace_preserved(self, rng):
        sh = SystemShape(3, 1)
        rho = DenseOperator(sh, random_density_matrix(sh.fock_dim, rng))
        for keep in ([1], [1, 2], [2, 3], [1, 3]):
            red = partial_trace_sites(rho, keep)
            assert abs(np.trace(red.matrix) - np.trace(rho.matrix)) < 1e-12

    def test_positivity_preserved(self, rng):
        sh = SystemShape(3, 1)
        rho = DenseOperator(sh, random_density_matrix(sh.fock_dim, rng))
        red = partial_trace_sites(rho, [2, 3])
        assert float(np.linalg.eigvalsh(red.matrix)[0]) > -1e-12

    def test_mu_family_reduction_terms(self):
        # Reduction to two sites: identity/4 plus i tan(pi/12)/4 times the
        # two-site pair word.
        state = mu_family_state(MuFamilyParams(6, 1, 1.0), validate=False)
        red = reduce_expansion(state, [1, 2])
        sh2 = red.shape
        t = math.tan(math.pi / 12.0)
        pair = mask_of(sh2, (1, 1), (2, 1))
        assert len(red) == 2
        assert abs(red.terms[0] - 0.25) < 1e-15
        assert abs(red.terms[pair] - 0.25j * t) < 1e-15
        dense_red = partial_trace_sites(to_matrix(state), [1, 2])
        assert np.max(np.abs(dense_red.matrix - to_matrix(red).matrix)) < 1e-12

    def test_agrees_with_expansion_route_nonprefix(self, rng):
        sh = SystemShape(3, 1)
        rho = DenseOperator(sh, random_even_density_matrix(sh, rng))
        red = partial_trace_sites(rho, [1, 3])
        exp_route = to_expansion(red)
        big_exp = to_expansion(rho)
        sub = reduce_expansion(big_exp, [1, 3])
        assert exp_route.max_coeff_diff(sub) < 1e-12

    def test_empty_keep_rejected(self, rng):
        sh = SystemShape(2, 1)
        rho = DenseOperator(sh, random_density_matrix(4, rng))
        with pytest.raises(ValueError):
            partial_trace_sites(rho, [])


class TestSpectral:
    def test_eig_diag(self):
        sh = SystemShape(1, 1)
        w, _ = hermitian_eig(DenseOperator(sh, np.diag([1.0, -1.0]).astype(complex)))
        assert np.allclose(w, [-1.0, 1.0])

    def test_eig_identity(self):
        sh = SystemShape(1, 1)
        w, _ = hermitian_eig(DenseOperator(sh, np.eye(2, dtype=complex)))
        assert np.allclose(w, [1.0, 1.0])

    def test_eig_reconstruction(self, rng):
        sh = SystemShape(2, 2)
        h = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        h = 0.5 * (h + h.conj().T)
        w, v = hermitian_eig(DenseOperator(sh, h))
        assert np.max(np.abs(h - (v * w) @ v.conj().T)) < 1e-9

    def test_eig_rejects_non_hermitian(self):
        sh = SystemShape(1, 1)
        with pytest.raises(ValueError):
            hermitian_eig(DenseOperator(sh, np.array([[0, 1], [0, 0]],
                                                     dtype=complex)))

    def test_trace_norm_values(self):
        sh = SystemShape(1, 1)
        assert trace_norm(DenseOperator(sh, np.diag([1.0, -1.0]).astype(complex))) == 2.0
        zero = DenseOperator(sh, np.zeros((2, 2), dtype=complex))
        assert trace_norm(zero) == 0.0
        proj_diff = np.diag([1.0, -1.0]).astype(complex)
        assert trace_norm(DenseOperator(sh, proj_diff)) == 2.0

    def test_trace_norm_rejects_non_hermitian(self):
        sh = SystemShape(1, 1)
        with pytest.raises(ValueError):
            trace_norm(DenseOperator(sh, np.array([[0, 2], [0, 0]],
                                                  dtype=complex)))

    def test_operator_norm(self, rng):
        a = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        assert abs(operator_norm(a)
                   - np.linalg.svd(a, compute_uv=False)[0]) < 1e-10


class TestCheckState:
    def test_maximally_mixed(self):
        sh = SystemShape(2, 1)
        validity = check_state(DenseOperator(sh, np.eye(4, dtype=complex) / 4))
        assert validity.all_ok

    def test_odd_perturbation_breaks_parity(self):
        sh = SystemShape(1, 1)
        bad = np.eye(2, dtype=complex) / 2 + 0.1 * X
        validity = check_state(DenseOperator(sh, bad))
        assert not validity.parity_ok

    def test_mu_family_positivity_range(self):
        # Frozen oracle values: the family is positive at mu = 0.5 but not
        # at mu = 1 (minimum eigenvalue (1 - tan(pi/12) * 5) / 64).
        ok = check_state(to_matrix(mu_family_state(MuFamilyParams(6, 1, 0.5))))
        assert ok.all_ok
        state = mu_family_state(MuFamilyParams(6, 1, 1.0), validate=False)
        validity = check_state(to_matrix(state))
        assert validity.trace_ok and validity.parity_ok
        assert not validity.positive_ok
        expected_min = (1.0 - math.tan(math.pi / 12.0) * 5.0) / 64.0
        assert abs(validity.min_eigenvalue - expected_min) < 1e-12

    def test_global_parity_signs(self):
        sh = SystemShape(2, 1)
        assert np.allclose(global_parity_signs(sh), [1, -1, -1, 1])


class TestEvenChannelDense:
    def test_trace_and_positivity_preserved(self, rng):
        # The site-wise even pinching is a quantum channel.
        sh = SystemShape(3, 1)
        for _ in range(10):
            rho = random_density_matrix(sh.fock_dim, rng)
            exp = to_expansion(DenseOperator(sh, rho))
            pinched = to_matrix(exp.even_channel()).matrix
            assert abs(np.trace(pinched) - np.trace(rho)) < 1e-10
            assert float(np.linalg.eigvalsh(
                0.5 * (pinched + pinched.conj().T))[0]) > -1e-10

    def test_pinch_norm_bound(self, rng):
        # Operator norm never grows under either parity projection.
        for _ in range(20):
            sh = SystemShape(2, 2)
            a = random_expansion(sh, rng, n_terms=6)
            na = operator_norm(to_matrix(a).matrix)
            site = int(rng.integers(1, 3))
            for sign in "+-":
                nc = operator_norm(to_matrix(a.parity_project(site, sign)).matrix)
                assert nc <= na + 1e-9


class TestCauchySchwarz:
    def test_random_instances(self, rng):
        for _ in range(40):
            sh = SystemShape(2, 1)
            rho = random_density_matrix(sh.fock_dim, rng)
            a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            lhs = abs(np.trace(rho @ a)) ** 2
            rhs = float(np.real(np.trace(rho @ a @ a.conj().T)))
            assert lhs <= rhs + 1e-9


class TestPermutationUnitary:
    def test_conjugation_realizes_relabeling(self, rng):
        for sh in (SystemShape(3, 1), SystemShape(2, 2)):
            for _ in range(5):
                pi = tuple(int(x) + 1 for x in rng.permutation(sh.sites))
                u = permutation_unitary(pi, sh).matrix
                assert np.allclose(u @ u.conj().T, np.eye(sh.fock_dim))
                a = random_expansion(sh, rng, n_terms=5)
                lhs = to_matrix(a.apply_permutation(pi)).matrix
                rhs = u @ to_matrix(a).matrix @ u.conj().T
                assert np.max(np.abs(lhs - rhs)) < 1e-10

    def test_single_majorana_images(self):
        sh = SystemShape(2, 1)
        u = permutation_unitary((2, 1), sh).matrix
        m1 = jw_matrix(mask_of(sh, (1, 1)), sh).matrix
        m2 = jw_matrix(mask_of(sh, (2, 1)), sh).matrix
        assert np.allclose(u @ m1 @ u.conj().T, m2)
        assert np.allclose(u @ m2 @ u.conj().T, m1)


class TestExpectationDense:
    def test_matches_expansion(self, rng):
        sh = SystemShape(2, 2)
        a = random_expansion(sh, rng, n_terms=5)
        dense = to_matrix(a).matrix
        for mask in range(0, 256, 11):
            direct = expectation_word_dense(dense, mask, sh)
            oracle = np.trace(dense @ word_matrix_oracle(mask, sh))
            assert abs(direct - oracle) < 1e-12


class TestMatrixFixture:
    def test_roundtrip(self, rng):
        sh = SystemShape(2, 1)
        m = DenseOperator(sh, random_density_matrix(4, rng))
        back = matrix_from_text(matrix_to_text(m), sh)
        assert np.max(np.abs(back.matrix - m.matrix)) < 1e-15

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            matrix_from_text("4\n" + "0 0 " * 4 + "\n", SystemShape(1, 1))


class TestIndependentOracleAgreement:
    def test_majorana_definitions(self):
        # The package Majoranas equal f† + f and i(f† - f) built from the
        # explicit ladder chain.
        sh = SystemShape(2, 2)
        mats = independent_majoranas(sh.total_modes)
        for g in range(sh.majorana_count):
            assert np.allclose(jw_matrix(1 << g, sh).matrix, mats[g])
