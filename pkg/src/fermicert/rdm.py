"""One-particle reduced density matrices of permutation-invariant states.

For a single mode per site the 1-RDM of a permutation-invariant state has
constant diagonal a = N/V and constant lower off-diagonal b (conjugated
above the diagonal).  Its spectrum is available in closed form, with a
separate real-b branch; the complex branch has isolated removable
singularities which are detected and reported rather than guessed, and the
direct eigensolver serves as the oracle there.

For several modes per site the 1-RDM is block structured (one repeated
diagonal block, one repeated off-diagonal block); a least-squares block fit
with its residual quantifies how well a given state follows that pattern.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .algebra import SystemShape
from .cumulants import LadderIndex, ladder_matrix
from .errors import SingularSpectrumError
from .fock import DenseOperator, check_state
from .report import INEQUALITY, VerificationReport, make_report

#: Permutation invariance forces |b| <= OFFDIAG_BOUND_CONST / V.
OFFDIAG_BOUND_CONST = 8.0 / math.sqrt(3.0)


@dataclass(frozen=True, eq=False)
class OneRDM:
    """Correlation matrix Gamma[j, k] = <f_j-dagger f_k> over all pV modes."""

    gamma: np.ndarray
    shape: SystemShape
    hermiticity_residual: float

    @property
    def n_modes(self) -> int:
        return self.shape.total_modes

    def particle_number(self) -> float:
        return float(np.real(np.trace(self.gamma)))


@dataclass(frozen=True)
class CirculantParams:
    """Constant-diagonal/constant-offdiagonal 1-RDM parameters."""

    V: int
    a: float
    b: complex

    def __post_init__(self):
        if self.V < 2:
            raise ValueError("circulant spectrum needs V >= 2")

    @property
    def particle_number(self) -> float:
        return self.a * self.V


def one_rdm(rho: DenseOperator, require_state: bool = True) -> OneRDM:
    """Compute Gamma[j, k] = tr(rho f_j† f_k) over the site-major flattened
    modes, symmetrized with the residual reported."""
    shape = rho.shape
    if require_state:
        validity = check_state(rho)
        if not (validity.trace_ok and validity.positive_ok):
            raise ValueError(
                "one_rdm needs a valid state: trace="
                f"{validity.trace_value}, min eig {validity.min_eigenvalue:.3e}")
    n = shape.total_modes
    p = shape.modes_per_site
    creators = []
    annihilators = []
    for site in range(1, shape.sites + 1):
        for mode in range(1, p + 1):
            creators.append(ladder_matrix(shape, -1, site, mode))
            annihilators.append(ladder_matrix(shape, 1, site, mode))
    gamma = np.zeros((n, n), dtype=np.complex128)
    for j in range(n):
        left = rho.matrix @ creators[j]
        left_t = left.T
        for k in range(n):
            # tr(rho f_j† f_k) without a second matrix product
            gamma[j, k] = np.sum(left_t * annihilators[k])
    residual = float(np.max(np.abs(gamma - gamma.conj().T)))
    gamma = 0.5 * (gamma + gamma.conj().T)
    return OneRDM(gamma, shape, residual)


def circulant_matrix(params: CirculantParams) -> np.ndarray:
    """Explicit correlation matrix with diagonal a, b below and conj(b)
    above the diagonal."""
    V = params.V
    out = np.full((V, V), params.b, dtype=np.complex128)
    out = np.tril(out, -1)
    out = out + out.conj().T + params.a * np.eye(V)
    return out


def circulant_spectrum(params: CirculantParams,
                       singular_tol: float = 1e-12) -> np.ndarray:
    """Closed-form eigenvalues lambda_k, k = 0..V-1.

    Real b: lambda_0 = a + b (V - 1) and lambda_k = a - b otherwise.
    Complex b = |b| e^(i phi): lambda_k = a + |b| [cos(2 pi k / V +
    (V-2) phi / V) - cos phi] / [1 - cos(2 pi k / V - 2 phi / V)].
    Raises :class:`SingularSpectrumError` naming every k whose denominator
    falls below ``singular_tol``.
    """
    values, singular = _circulant_values(params, singular_tol)
    if singular:
        raise SingularSpectrumError(singular)
    return values


def _circulant_values(params: CirculantParams,
                      singular_tol: float = 1e-12):
    V = params.V
    a = params.a
    b = complex(params.b)
    out = np.empty(V, dtype=float)
    singular = []
    if abs(b.imag) < 1e-15:
        br = b.real
        for k in range(V):
            out[k] = a + br * (V - 1) if k == 0 else a - br
        return out, singular
    mag, phi = abs(b), cmath.phase(b)
    for k in range(V):
        angle = 2.0 * math.pi * k / V
        denom = 1.0 - math.cos(angle - 2.0 * phi / V)
        if abs(denom) < singular_tol:
            singular.append(k)
            out[k] = math.nan
            continue
        numer = math.cos(angle + (V - 2.0) * phi / V) - math.cos(phi)
        out[k] = a + mag * numer / denom
    return out, singular


def circulant_spectrum_with_fallback(params: CirculantParams,
                                     singular_tol: float = 1e-12):
    """Closed-form values with direct diagonalization filling singular k.

    Returns (values, singular_ks); comparisons against the formula should
    exclude the singular entries, whose values here come from the oracle.
    """
    values, singular = _circulant_values(params, singular_tol)
    if singular:
        direct = np.sort(np.linalg.eigvalsh(circulant_matrix(params)))
        healthy = np.sort(values[~np.isnan(values)])
        # Assign the leftover oracle eigenvalues to the singular slots.
        used = np.zeros(len(direct), dtype=bool)
        for lam in healthy:
            idx = int(np.argmin(np.where(used, np.inf, np.abs(direct - lam))))
            used[idx] = True
        leftovers = iter(direct[~used])
        for k in singular:
            values[k] = next(leftovers)
    return values, singular


def fit_circulant(gamma: np.ndarray) -> Tuple[float, complex, float]:
    """Least-squares (a, b) fit of the constant-diagonal pattern and the
    maximum absolute deviation from it."""
    V = gamma.shape[0]
    a = float(np.real(np.mean(np.diag(gamma))))
    lower = np.tril_indices(V, -1)
    b = complex(np.mean(gamma[lower])) if V > 1 else 0.0
    model = circulant_matrix(CirculantParams(V, a, b)) if V > 1 else gamma
    residual = float(np.max(np.abs(gamma - model)))
    return a, b, residual


def mode_occupations(rho: DenseOperator) -> np.ndarray:
    """<n_j> per flattened mode, read off the Fock-basis diagonal.

    Independent of the ladder-operator route used by :func:`one_rdm`, so it
    serves as the trace oracle for the 1-RDM diagonal."""
    shape = rho.shape
    dim = shape.fock_dim
    idx = np.arange(dim)
    diag = np.real(np.diag(rho.matrix))
    occ = np.empty(shape.total_modes)
    for mode in range(shape.total_modes):
        bits = (idx >> (shape.total_modes - 1 - mode)) & 1
        occ[mode] = float(np.dot(diag, bits))
    return occ


def verify_pauli_constraints(rdm: OneRDM,
                             source: Optional[DenseOperator] = None,
                             source_invariant: bool = False,
                             band_tol: float = 1e-10,
                             trace_tol: float = 1e-9,
                             bound_tol: float = 1e-9) -> VerificationReport:
    """Occupation-band check on a 1-RDM.

    Verifies eigenvalues within [-band_tol, 1 + band_tol]; when ``source``
    is given, the trace against independently computed mode occupations;
    and for permutation-invariant single-mode sources the off-diagonal
    suppression |b| <= 8/(sqrt(3) V) + bound_tol.  The report's lhs is the
    worst tolerance-normalized violation (pass at lhs <= 0).
    """
    start = time.perf_counter()
    eigs = np.linalg.eigvalsh(rdm.gamma)
    lo, hi = float(eigs[0]), float(eigs[-1])
    violations = [max(-lo, hi - 1.0) - band_tol]
    notes = [f"eigenvalue range [{lo:.6g}, {hi:.6g}]",
             f"hermiticity residual {rdm.hermiticity_residual:.2e}"]
    if source is not None:
        occ_sum = float(np.sum(mode_occupations(source)))
        trace_dev = abs(rdm.particle_number() - occ_sum)
        violations.append(trace_dev - trace_tol)
        notes.append(f"trace {rdm.particle_number():.9g} vs occupations "
                     f"{occ_sum:.9g}")
    if source_invariant and rdm.shape.modes_per_site == 1:
        a, b, resid = fit_circulant(rdm.gamma)
        bound = OFFDIAG_BOUND_CONST / rdm.shape.sites
        violations.append(abs(b) - bound - bound_tol)
        notes.append(f"fit a={a:.6g} |b|={abs(b):.6g} bound={bound:.6g} "
                     f"pattern residual {resid:.2e}")
    lhs = max(violations)
    return make_report("rdm-pauli", INEQUALITY,
                       {"V": rdm.shape.sites, "p": rdm.shape.modes_per_site},
                       lhs, 0.0, 0.0,
                       time.perf_counter() - start, notes)


def block_rdm_structure(rho: DenseOperator
                        ) -> Tuple[np.ndarray, np.ndarray, float]:
    """Fit the block pattern (diagonal blocks A, off-diagonal blocks B)
    of the 1-RDM of a several-modes-per-site state.

    Returns (A, B, residual); A is Hermitian with trace N/V, B need not be.
    Residual is the max deviation of the actual 1-RDM from the fitted
    pattern, a diagnostic rather than a pass/fail quantity.
    """
    shape = rho.shape
    p = shape.modes_per_site
    if p < 2:
        raise ValueError("block structure needs p >= 2 modes per site")
    V = shape.sites
    gamma = one_rdm(rho, require_state=False).gamma
    blocks = gamma.reshape(V, p, V, p).transpose(0, 2, 1, 3)
    a_block = np.mean([blocks[j, j] for j in range(V)], axis=0)
    uppers = [blocks[j, l] for j in range(V) for l in range(V) if j < l]
    b_block = np.mean(uppers, axis=0) if uppers else np.zeros((p, p))
    model = np.zeros_like(gamma).reshape(V, p, V, p).transpose(0, 2, 1, 3)
    for j in range(V):
        for l in range(V):
            if j == l:
                model[j, l] = a_block
            elif j < l:
                model[j, l] = b_block
            else:
                model[j, l] = b_block.conj().T
    model = model.transpose(0, 2, 1, 3).reshape(V * p, V * p)
    residual = float(np.max(np.abs(gamma - model)))
    a_block = 0.5 * (a_block + a_block.conj().T)
    return a_block, b_block, residual


def number_operator_variance(rho: DenseOperator) -> float:
    """Variance of the total particle number; near zero means the state is
    (numerically) a particle-number eigenstate."""
    shape = rho.shape
    dim = shape.fock_dim
    idx = np.arange(dim)
    counts = np.zeros(dim)
    for bit in range(shape.total_modes):
        counts += (idx >> bit) & 1
    diag = np.real(np.diag(rho.matrix))
    mean = float(np.dot(diag, counts))
    second = float(np.dot(diag, counts ** 2))
    return max(second - mean * mean, 0.0)
