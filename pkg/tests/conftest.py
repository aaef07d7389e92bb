"""Shared test helpers: independent matrix oracles and random states.

The Majorana matrices built here use the textbook kron construction
directly, independent of the package's Pauli-string route, so they can
serve as an oracle for it.
"""

from __future__ import annotations

import numpy as np
import pytest

from fermicert.algebra import SystemShape

I2 = np.eye(2, dtype=np.complex128)
Z2 = np.diag([1.0, -1.0]).astype(np.complex128)
ANNIHILATE = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=np.complex128)


def kron_chain(mats):
    out = np.array([[1.0 + 0.0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def independent_ladder(n_modes: int, mode: int) -> np.ndarray:
    """Annihilation operator f_mode via the explicit Jordan-Wigner chain
    (Z strings left of the mode, site-major, first factor = mode 0)."""
    mats = [Z2] * mode + [ANNIHILATE] + [I2] * (n_modes - mode - 1)
    return kron_chain(mats)


def independent_majoranas(n_modes: int):
    """All 2 * n_modes Majorana matrices from the ladder construction."""
    out = []
    for mode in range(n_modes):
        f = independent_ladder(n_modes, mode)
        fd = f.conj().T
        out.append(fd + f)
        out.append(1j * (fd - f))
    return out


def word_matrix_oracle(mask: int, shape: SystemShape) -> np.ndarray:
    """Matrix of a canonical word as the ordered product of independent
    Majorana matrices."""
    ms = independent_majoranas(shape.total_modes)
    out = np.eye(shape.fock_dim, dtype=np.complex128)
    for g in range(shape.majorana_count):
        if (mask >> g) & 1:
            out = out @ ms[g]
    return out


def random_density_matrix(dim: int, rng) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.real(np.trace(rho))


def random_even_density_matrix(shape: SystemShape, rng) -> np.ndarray:
    """Random state pinched onto the parity-superselected sector."""
    from fermicert.fock import global_parity_signs

    rho = random_density_matrix(shape.fock_dim, rng)
    signs = global_parity_signs(shape)
    rho = 0.5 * (rho + signs[:, None] * rho * signs[None, :])
    return rho / np.real(np.trace(rho))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
