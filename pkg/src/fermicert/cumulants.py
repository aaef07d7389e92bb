"""Fermionic cumulants over even partitions and Fourier-mode central-limit
certification.

Cumulants K_w of a state are defined implicitly through

    tr(rho f^{c_1} ... f^{c_w}) = sum over partitions P of [w] into
        even-sized blocks of  sign(P) * prod_{blocks} K_{|block|}

where sign(P) is the parity of the permutation that sorts the blockwise
concatenation, and f^{+1} = f (annihilation), f^{-1} = f-dagger.  The
module extracts cumulants recursively from moments, exactly mirroring that
definition, and certifies:

* the closed factorized form of Fourier-mode cumulants of V-fold product
  states (direct numerics against the phase-sum formula),
* the delta-rule decoupling of second cumulants,
* the V^{(2-w)/2} suppression of higher Fourier cumulants,
* the Gaussian-mixture deviation metric used by the correlated-state
  central limit corollary.
"""

from __future__ import annotations

import cmath
import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .algebra import SystemShape
from .definetti import ProductMixture, SingleSiteState, product_power
from .errors import ResourceCapError
from .fock import DenseOperator, jw_matrix, mode_cap
from .report import (EQUALITY, INEQUALITY, PROPERTY, VerificationReport,
                     make_report)


@dataclass(frozen=True)
class LadderIndex:
    """One ladder operator: c = +1 annihilation, c = -1 creation, acting on
    ``site`` and mode ``mode``; ``q`` is the optional Fourier label."""

    c: int
    site: int
    mode: int
    q: Optional[int] = None

    def __post_init__(self):
        if self.c not in (1, -1):
            raise ValueError(f"c must be +1 or -1, got {self.c}")

    def triple(self) -> Tuple[int, int, Optional[int]]:
        return (self.c, self.mode, self.q)


def fourier_q_range(V: int) -> range:
    """Admissible Fourier labels: -floor((V-1)/2) .. floor(V/2)."""
    return range(-((V - 1) // 2), V // 2 + 1)


# -- even partitions ----------------------------------------------------------

def _even_partitions_of(positions: Tuple[int, ...]):
    """All partitions of a position tuple into even-sized blocks, each block
    increasing, blocks anchored on their least element."""
    if not positions:
        yield ()
        return
    anchor = positions[0]
    rest = positions[1:]
    for odd_size in range(1, len(rest) + 1, 2):
        for combo in itertools.combinations(rest, odd_size):
            block = (anchor,) + combo
            remaining = tuple(x for x in rest if x not in combo)
            for sub in _even_partitions_of(remaining):
                yield (block,) + sub


def even_partitions(w: int) -> List[Tuple[Tuple[int, ...], ...]]:
    """Exhaustive, duplicate-free even partitions of {1, .., w}."""
    if w % 2 or w < 2:
        raise ValueError(f"even partitions need even w >= 2, got {w}")
    return list(_even_partitions_of(tuple(range(1, w + 1))))


def partition_sign(partition: Sequence[Sequence[int]]) -> int:
    """Sign of the permutation sorting the blockwise concatenation."""
    seq = [x for block in partition for x in block]
    inversions = 0
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                inversions += 1
    return -1 if inversions % 2 else 1


def count_even_partitions(w: int) -> int:
    """Independent recurrence for the number of even partitions."""
    if w == 0:
        return 1
    total = 0
    for block in range(2, w + 1, 2):
        total += math.comb(w - 1, block - 1) * count_even_partitions(w - block)
    return total


# -- moment / cumulant engine --------------------------------------------------

def cumulant_from_moment_fn(moment_fn: Callable[[Tuple[int, ...]], complex],
                            w: int) -> complex:
    """Extract the order-w joint cumulant from a subset-moment oracle.

    ``moment_fn`` receives increasing position tuples (0-based into the
    operator list) of even size.
    """
    if w % 2 or w < 2:
        raise ValueError(f"cumulants are defined for even w >= 2, got {w}")
    memo: Dict[Tuple[int, ...], complex] = {}

    def K(positions: Tuple[int, ...]) -> complex:
        hit = memo.get(positions)
        if hit is not None:
            return hit
        total = moment_fn(positions)
        for partition in _even_partitions_of(positions):
            if len(partition) == 1:
                continue
            prod = complex(partition_sign(partition))
            for block in partition:
                prod *= K(block)
            total -= prod
        memo[positions] = total
        return total

    return K(tuple(range(w)))


def moment_from_cumulant_fn(cumulant_fn: Callable[[Tuple[int, ...]], complex],
                            w: int) -> complex:
    """Recombine cumulants into the order-w moment (consistency oracle)."""
    total = 0.0 + 0.0j
    for partition in _even_partitions_of(tuple(range(w))):
        prod = complex(partition_sign(partition))
        for block in partition:
            prod *= cumulant_fn(block)
        total += prod
    return total


def _matrix_moment_fn(rho: np.ndarray, mats: Sequence[np.ndarray]):
    cache: Dict[Tuple[int, ...], complex] = {}

    def moment(positions: Tuple[int, ...]) -> complex:
        hit = cache.get(positions)
        if hit is not None:
            return hit
        acc = rho
        for i in positions:
            acc = acc @ mats[i]
        val = complex(np.trace(acc))
        cache[positions] = val
        return val

    return moment


def ladder_matrix(shape: SystemShape, c: int, site: int, mode: int) -> np.ndarray:
    """Dense ladder operator f (c = +1) or f-dagger (c = -1) from the two
    Majoranas of the mode: f = (m^(2a-1) + i m^(2a))/2."""
    g1 = shape.bit_position(site, 2 * mode - 1)
    g2 = shape.bit_position(site, 2 * mode)
    m1 = jw_matrix(1 << g1, shape).matrix
    m2 = jw_matrix(1 << g2, shape).matrix
    if c == 1:
        return 0.5 * (m1 + 1j * m2)
    return 0.5 * (m1 - 1j * m2)


def fourier_ladder_matrix(shape: SystemShape, c: int, mode: int,
                          q: int) -> np.ndarray:
    """Fourier ladder mode (1/sqrt(V)) sum_j exp(2 pi i c q j / V) f_j^c."""
    V = shape.sites
    if q not in fourier_q_range(V):
        raise ValueError(f"q = {q} outside {fourier_q_range(V)} for V = {V}")
    out = np.zeros((shape.fock_dim, shape.fock_dim), dtype=np.complex128)
    for j in range(1, V + 1):
        phase = cmath.exp(2j * math.pi * c * q * j / V)
        out += phase * ladder_matrix(shape, c, j, mode)
    return out / math.sqrt(V)


def moment(rho: DenseOperator, ops: Sequence[LadderIndex]) -> complex:
    """tr(rho f^{c_1} ... f^{c_w}) for site-local ladder operators."""
    mats = [ladder_matrix(rho.shape, o.c, o.site, o.mode) for o in ops]
    fn = _matrix_moment_fn(rho.matrix, mats)
    return fn(tuple(range(len(ops))))


def cumulant(rho: DenseOperator, ops: Sequence[LadderIndex]) -> complex:
    """Order-|ops| joint cumulant of site-local ladder operators."""
    if len(ops) % 2:
        raise ValueError("cumulants need an even number of operators")
    mats = [ladder_matrix(rho.shape, o.c, o.site, o.mode) for o in ops]
    return cumulant_from_moment_fn(_matrix_moment_fn(rho.matrix, mats),
                                   len(ops))


def cumulant_mats(rho: np.ndarray, mats: Sequence[np.ndarray]) -> complex:
    """Joint cumulant for explicitly given operator matrices."""
    if len(mats) % 2:
        raise ValueError("cumulants need an even number of operators")
    return cumulant_from_moment_fn(_matrix_moment_fn(rho, mats), len(mats))


# -- Fourier cumulants of product states ---------------------------------------

@dataclass(frozen=True)
class FourierCumulantResult:
    """Direct and closed-form Fourier cumulants of a V-fold product state."""

    direct: Optional[complex]
    closed_form: complex
    single_site_cumulant: complex
    phase_sum: complex
    distinct_triples: bool
    resonant: bool


def _require_single_site(rho_single: DenseOperator) -> int:
    if rho_single.shape.sites != 1:
        raise ValueError("rho_single must live on a single site")
    return rho_single.shape.modes_per_site


def fourier_cumulant(rho_single: DenseOperator, V: int,
                     ops: Sequence[LadderIndex],
                     override_cap: bool = False) -> FourierCumulantResult:
    """Cumulant of the V-fold copy of a single-site state in Fourier modes.

    Computes the direct value on the full 2^(pV) space when within the mode
    cap (otherwise ``direct`` is None) and always the closed factorized
    prediction V^(-w/2) * K_w(single site) * sum_j exp(2 pi i sum_l c_l q_l
    j / V).
    """
    p = _require_single_site(rho_single)
    w = len(ops)
    if w % 2:
        raise ValueError("cumulants need an even number of operators")
    for o in ops:
        if o.q is None:
            raise ValueError("Fourier cumulants need q labels on every index")
        if o.q not in fourier_q_range(V):
            raise ValueError(f"q = {o.q} outside range for V = {V}")

    site_ops = [LadderIndex(o.c, 1, o.mode) for o in ops]
    k_single = cumulant(rho_single, site_ops)
    total_q = sum(o.c * o.q for o in ops)
    phase_sum = sum(cmath.exp(2j * math.pi * total_q * j / V)
                    for j in range(1, V + 1))
    closed = (V ** (-w / 2.0)) * k_single * phase_sum
    resonant = total_q % V == 0

    direct = None
    if V * p <= mode_cap() or override_cap:
        xi = SingleSiteState(rho_single.matrix, True)
        big = product_power(xi, V, override_cap=override_cap)
        mats = [fourier_ladder_matrix(big.shape, o.c, o.mode, o.q)
                for o in ops]
        direct = cumulant_mats(big.matrix, mats)

    triples = [o.triple() for o in ops]
    return FourierCumulantResult(direct, complex(closed), complex(k_single),
                                 complex(phase_sum),
                                 len(set(triples)) == len(triples), resonant)


def verify_suppression(rho_single: DenseOperator, V: int,
                       ops: Sequence[LadderIndex],
                       tol: float = 1e-9) -> VerificationReport:
    """Certify |K_w(Fourier modes of the V-fold copy)| <=
    V^((2-w)/2) |K_w(single site)|."""
    start = time.perf_counter()
    w = len(ops)
    if w <= 2:
        raise ValueError("suppression concerns cumulant orders w > 2")
    result = fourier_cumulant(rho_single, V, ops)
    lhs = abs(result.direct if result.direct is not None else result.closed_form)
    rhs = (V ** ((2.0 - w) / 2.0)) * abs(result.single_site_cumulant)
    notes = ["closed form used (over mode cap)"] if result.direct is None else []
    if not result.distinct_triples:
        notes.append("repeated (c, mode, q) triples: outside the factorized "
                     "regime, checked numerically only")
    if result.resonant:
        notes.append("resonant phase sum")
    p = rho_single.shape.modes_per_site
    return make_report("hudson-suppression", INEQUALITY,
                       {"V": V, "p": p, "w": w}, lhs, rhs, tol,
                       time.perf_counter() - start, notes)


# -- Gaussian-mixture deviation metric (correlated-state CLT) -------------------

def _pairings_of(positions: Tuple[int, ...]):
    if not positions:
        yield ()
        return
    anchor = positions[0]
    rest = positions[1:]
    for i, partner in enumerate(rest):
        block = (anchor, partner)
        remaining = rest[:i] + rest[i + 1:]
        for sub in _pairings_of(remaining):
            yield (block,) + sub


def wick_moment(pair_value: Callable[[int, int], complex],
                positions: Tuple[int, ...]) -> complex:
    """Moment of a Gaussian state from its pair values (signed pairings)."""
    if len(positions) % 2:
        return 0.0
    if not positions:
        return 1.0
    total = 0.0 + 0.0j
    for pairing in _pairings_of(positions):
        term = complex(partition_sign(pairing))
        for i, j in pairing:
            term *= pair_value(i, j)
        total += term
    return total


def gaussian_mixture_deviation(rho_k: DenseOperator, mixture: ProductMixture,
                               ops: Sequence[LadderIndex]) -> Tuple[complex, complex]:
    """Direct Fourier cumulant of ``rho_k`` against the prediction of the
    matching mixture of Gaussian states.

    Each mixture component is replaced by the Gaussian state with the same
    second Fourier moments; the predicted cumulant is extracted from the
    weighted Wick moments.  Returns (direct, predicted).
    """
    shape = rho_k.shape
    mats = [fourier_ladder_matrix(shape, o.c, o.mode, o.q) for o in ops]
    direct = cumulant_mats(rho_k.matrix, mats)

    comp_pairs: List[Dict[Tuple[int, int], complex]] = []
    for xi in mixture.components:
        power = product_power(xi, shape.sites).matrix
        pairs: Dict[Tuple[int, int], complex] = {}
        for i in range(len(ops)):
            for j in range(i + 1, len(ops)):
                pairs[(i, j)] = complex(np.trace(power @ mats[i] @ mats[j]))
        comp_pairs.append(pairs)

    weights = np.asarray(mixture.weights, dtype=float)

    def predicted_moment(positions: Tuple[int, ...]) -> complex:
        total = 0.0 + 0.0j
        for a, pairs in zip(weights, comp_pairs):
            total += a * wick_moment(lambda i, j: pairs[(i, j)], positions)
        return total

    predicted = cumulant_from_moment_fn(predicted_moment, len(ops))
    return direct, predicted


def corollary_index_sets(k: int, p: int) -> List[Tuple[LadderIndex, ...]]:
    """Deterministic degree-4 Fourier index sample on a k-site system:
    one resonant plus, when one exists, one off-resonant distinct-triple
    choice.  The site field of the indices is unused for Fourier modes."""
    q_hi = max(fourier_q_range(k))
    sets: List[Tuple[LadderIndex, ...]] = []
    if p == 1:
        sets.append((LadderIndex(-1, 1, 1, 0), LadderIndex(1, 1, 1, 0),
                     LadderIndex(-1, 1, 1, q_hi), LadderIndex(1, 1, 1, q_hi)))
        if k >= 3:
            off = (LadderIndex(-1, 1, 1, 0), LadderIndex(1, 1, 1, 0),
                   LadderIndex(-1, 1, 1, 1), LadderIndex(1, 1, 1, -1))
            sets.append(off)
    else:
        sets.append((LadderIndex(-1, 1, 1, 0), LadderIndex(1, 1, 1, 0),
                     LadderIndex(-1, 1, 2, 0), LadderIndex(1, 1, 2, 0)))
        off = (LadderIndex(-1, 1, 1, 0), LadderIndex(1, 1, 1, 0),
               LadderIndex(-1, 1, 2, q_hi), LadderIndex(1, 1, 2, 0))
        sets.append(off)
    for ops in sets[1:]:
        assert sum(o.c * o.q for o in ops) % k != 0
    return sets


def verify_corollary(rho_k: DenseOperator, mixture: ProductMixture, V: int,
                     ops_sets: Optional[Sequence[Sequence[LadderIndex]]] = None
                     ) -> VerificationReport:
    """Report the Gaussian-mixture deviation of a k-site reduction against
    the reference rate 1/k + k^(3/2)/V.

    No absolute constant is claimed; the report records the empirical ratio
    and the sweep driver applies the scaling (slope) gate.
    """
    start = time.perf_counter()
    shape = rho_k.shape
    k, p = shape.sites, shape.modes_per_site
    if ops_sets is None:
        ops_sets = corollary_index_sets(k, p)
    metric = 0.0
    for ops in ops_sets:
        direct, predicted = gaussian_mixture_deviation(rho_k, mixture, ops)
        metric = max(metric, abs(direct - predicted))
    rate = 1.0 / k + k ** 1.5 / V
    notes = [f"empirical constant {metric / rate:.6g}",
             "property-based: scaling gate applied by the sweep driver"]
    report = VerificationReport("corollary", PROPERTY,
                                {"V": V, "p": p, "k": k,
                                 "sets": len(ops_sets)},
                                float(metric), float(rate), 0.0, True,
                                time.perf_counter() - start, notes)
    return report


def lemma4_equality_report(rho_single: DenseOperator, V: int,
                           ops: Sequence[LadderIndex],
                           tol: float = 1e-9) -> Optional[VerificationReport]:
    """Equality of the direct Fourier cumulant with the closed factorized
    form; None (skip) when the distinct-triples hypothesis fails."""
    start = time.perf_counter()
    result = fourier_cumulant(rho_single, V, ops)
    if not result.distinct_triples:
        return None
    if result.direct is None:
        raise ResourceCapError("direct check needs the full product state")
    lhs = abs(result.direct - result.closed_form)
    p = rho_single.shape.modes_per_site
    return make_report("hudson-lemma4", EQUALITY,
                       {"V": V, "p": p, "w": len(ops)},
                       lhs, 0.0, tol, time.perf_counter() - start)
