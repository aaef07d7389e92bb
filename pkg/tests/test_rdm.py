"""One-particle density matrices: circulant spectra, occupation bands and
block structure."""

import math

import numpy as np
import pytest

from conftest import random_density_matrix
from fermicert.algebra import SystemShape
from fermicert.definetti import SingleSiteState, product_power
from fermicert.errors import SingularSpectrumError
from fermicert.fock import DenseOperator, to_matrix
from fermicert.invariance import MuFamilyParams, mu_family_state
from fermicert.rdm import (CirculantParams, OFFDIAG_BOUND_CONST, OneRDM,
                           block_rdm_structure, circulant_matrix,
                           circulant_spectrum,
                           circulant_spectrum_with_fallback, fit_circulant,
                           mode_occupations, number_operator_variance,
                           one_rdm, verify_pauli_constraints)

TAN6 = math.tan(math.pi / 12.0)


class TestOneRDM:
    def test_vacuum_zero(self):
        sh = SystemShape(3, 1)
        vac = np.zeros((8, 8), dtype=complex)
        vac[0, 0] = 1.0
        rdm = one_rdm(DenseOperator(sh, vac))
        assert np.max(np.abs(rdm.gamma)) == 0.0

    def test_fully_occupied_identity(self):
        sh = SystemShape(2, 1)
        full = np.zeros((4, 4), dtype=complex)
        full[3, 3] = 1.0
        rdm = one_rdm(DenseOperator(sh, full))
        assert np.allclose(rdm.gamma, np.eye(2))

    def test_mu_family_circulant(self):
        # a = 1/2 and b = i tan(pi/12) / 4 from the pair correlators:
        # f_j† f_k = (m_j^1 - i m_j^2)(m_k^1 + i m_k^2)/4 and only the
        # m^1 m^1 expectation survives.
        state = mu_family_state(MuFamilyParams(6, 1, 1.0), validate=False)
        rdm = one_rdm(to_matrix(state), require_state=False)
        a, b, resid = fit_circulant(rdm.gamma)
        assert a == pytest.approx(0.5, abs=1e-12)
        assert b == pytest.approx(0.25j * TAN6, abs=1e-12)
        assert resid < 1e-12
        assert rdm.hermiticity_residual < 1e-12

    def test_occupation_band(self):
        state = mu_family_state(MuFamilyParams(6, 1, 1.0), validate=False)
        rdm = one_rdm(to_matrix(state), require_state=False)
        eigs = np.linalg.eigvalsh(rdm.gamma)
        assert eigs[0] > -1e-10 and eigs[-1] < 1.0 + 1e-10

    def test_requires_state(self, rng):
        sh = SystemShape(2, 1)
        bad = DenseOperator(sh, np.diag([2.0, -1.0, 0, 0]).astype(complex))
        with pytest.raises(ValueError):
            one_rdm(bad)


class TestCirculantSpectrum:
    def test_b_zero_flat(self):
        vals = circulant_spectrum(CirculantParams(5, 0.3, 0.0 + 0j))
        assert np.allclose(vals, 0.3)

    def test_real_branch_values(self):
        vals = circulant_spectrum(CirculantParams(6, 0.5, complex(0.05)))
        assert vals[0] == 0.5 + 0.05 * 5
        assert np.allclose(vals[1:], 0.5 - 0.05)

    def test_real_branch_matches_direct(self):
        for V in range(2, 13):
            for b in (-0.1, 0.05, 0.3 / V):
                params = CirculantParams(V, 0.5, complex(b))
                vals = np.sort(circulant_spectrum(params))
                direct = np.sort(np.linalg.eigvalsh(circulant_matrix(params)))
                assert np.max(np.abs(vals - direct)) < 1e-10

    def test_complex_branch_matches_direct(self):
        params = CirculantParams(6, 0.5, 0.05 * np.exp(1j * math.pi / 5))
        vals = np.sort(circulant_spectrum(params))
        direct = np.sort(np.linalg.eigvalsh(circulant_matrix(params)))
        assert np.max(np.abs(vals - direct)) < 1e-10

    def test_trace_rule(self):
        for V in (2, 5, 9):
            for b in (complex(0.07), 0.05 * np.exp(0.9j)):
                vals = circulant_spectrum(CirculantParams(V, 0.5, b))
                assert abs(np.sum(vals) - 0.5 * V) < 1e-10

    def test_singularity_named_and_fallback(self):
        params = CirculantParams(6, 0.5, complex(0.05 * np.exp(1e-7j)))
        with pytest.raises(SingularSpectrumError) as err:
            circulant_spectrum(params)
        assert 0 in err.value.singular_ks
        vals, singular = circulant_spectrum_with_fallback(params)
        assert singular == [0]
        direct = np.sort(np.linalg.eigvalsh(circulant_matrix(params)))
        assert np.max(np.abs(np.sort(vals) - direct)) < 1e-10

    def test_small_V_rejected(self):
        with pytest.raises(ValueError):
            CirculantParams(1, 0.5, 0j)


class TestPauliConstraints:
    def test_vacuum_passes(self):
        sh = SystemShape(3, 1)
        vac = np.zeros((8, 8), dtype=complex)
        vac[0, 0] = 1.0
        dense = DenseOperator(sh, vac)
        rep = verify_pauli_constraints(one_rdm(dense), source=dense)
        assert rep.passed

    def test_mu_family_bound(self):
        state = mu_family_state(MuFamilyParams(6, 1, 1.0), validate=False)
        dense = to_matrix(state)
        rdm = one_rdm(dense, require_state=False)
        rep = verify_pauli_constraints(rdm, source=dense,
                                       source_invariant=True)
        assert rep.passed
        _, b, _ = fit_circulant(rdm.gamma)
        assert abs(b) <= OFFDIAG_BOUND_CONST / 6.0 + 1e-9

    def test_hand_built_violation_fails(self):
        gamma = circulant_matrix(CirculantParams(4, 0.5, complex(1.0)))
        rep = verify_pauli_constraints(OneRDM(gamma, SystemShape(4, 1), 0.0))
        assert not rep.passed
        assert float(np.linalg.eigvalsh(gamma)[0]) < 0

    def test_mode_occupations_oracle(self, rng):
        sh = SystemShape(2, 1)
        rho = DenseOperator(sh, random_density_matrix(4, rng))
        occ = mode_occupations(rho)
        rdm = one_rdm(rho, require_state=False)
        assert np.allclose(occ, np.real(np.diag(rdm.gamma)), atol=1e-12)


class TestBlockStructure:
    def test_product_state_has_zero_offdiagonal_block(self):
        xi = SingleSiteState(np.diag([0.5, 0.2, 0.2, 0.1]).astype(complex),
                             True)
        power = product_power(xi, 4)
        a_block, b_block, resid = block_rdm_structure(power)
        assert np.max(np.abs(b_block)) < 1e-10
        assert resid < 1e-10
        assert np.max(np.abs(a_block - a_block.conj().T)) < 1e-12

    def test_mu_family_p2_nonzero_block(self):
        state = mu_family_state(MuFamilyParams(4, 2, 0.8), validate=False)
        a_block, b_block, resid = block_rdm_structure(to_matrix(state))
        t4 = math.tan(math.pi / 8.0)
        assert b_block[0, 0] == pytest.approx(-0.25j * 0.8 * t4, abs=1e-10)
        assert resid < 1e-9
        assert np.real(np.trace(a_block)) == pytest.approx(1.0, abs=1e-9)

    def test_non_invariant_state_large_residual(self, rng):
        sh = SystemShape(3, 2)
        rho = DenseOperator(sh, random_density_matrix(sh.fock_dim, rng))
        _, _, resid = block_rdm_structure(rho)
        assert resid > 1e-3

    def test_p1_rejected(self):
        sh = SystemShape(3, 1)
        rho = DenseOperator(sh, np.eye(8, dtype=complex) / 8)
        with pytest.raises(ValueError):
            block_rdm_structure(rho)


class TestSuppressionWithSize:
    def test_b_times_v_bounded(self):
        # Fitted |b| V = V tan(pi/2V) / 4 -> pi/8 for the mu family.
        for V in (6, 8, 10):
            state = mu_family_state(MuFamilyParams(V, 1, 1.0), validate=False)
            rdm = one_rdm(to_matrix(state), require_state=False)
            _, b, _ = fit_circulant(rdm.gamma)
            expected = math.tan(math.pi / (2 * V)) / 4.0
            assert abs(b) == pytest.approx(expected, abs=1e-12)
            assert abs(b) * V < OFFDIAG_BOUND_CONST


class TestNumberVariance:
    def test_eigenstate_zero_variance(self):
        sh = SystemShape(2, 1)
        full = np.zeros((4, 4), dtype=complex)
        full[3, 3] = 1.0
        assert number_operator_variance(DenseOperator(sh, full)) < 1e-12

    def test_mixed_state_positive_variance(self):
        sh = SystemShape(2, 1)
        mixed = DenseOperator(sh, np.eye(4, dtype=complex) / 4)
        assert number_operator_variance(mixed) == pytest.approx(0.5)
