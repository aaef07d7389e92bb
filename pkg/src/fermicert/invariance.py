"""Permutation invariance of fermionic states and the trace-norm
suppression of their locally odd content.

A state is *permutation invariant* when (1) expectation values of every
Majorana word are unchanged under site permutations that preserve the
written order of the word, and (2) expectation values of words with even
Majorana count on every site are unchanged under arbitrary site
permutations.  A state is *fully* invariant when condition (1) holds for
all permutations; the anti-commutation relations then force mixed odd-odd
correlators to vanish, which the weaker definition deliberately avoids.

The mu family built here is the standard witness separating the two
notions: it is permutation invariant for every mu in [-1, 1] but fully
invariant only at mu = 0.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from .algebra import (OperatorExpansion, SystemShape, canonicalize_positions,
                      even_on_all_sites, validate_permutation)
from .fock import (DenseOperator, expectation_word_dense, reduce_expansion,
                   to_matrix, trace_norm)
from .report import INEQUALITY, VerificationReport, make_report


@dataclass(frozen=True)
class MuFamilyParams:
    """Parameters of the two-Majorana correlated family."""

    sites: int
    modes_per_site: int
    mu: float

    def __post_init__(self):
        if self.sites < 2:
            raise ValueError("mu family needs at least 2 sites")
        if self.modes_per_site < 1:
            raise ValueError("modes_per_site must be >= 1")
        if abs(self.mu) > 1.0:
            raise ValueError(f"|mu| must be <= 1, got {self.mu}")

    @property
    def shape(self) -> SystemShape:
        return SystemShape(self.sites, self.modes_per_site)


@dataclass(frozen=True)
class InvarianceReport:
    """Maximum violations of the two invariance conditions.

    Violations are max over checked (word, permutation) pairs of
    |tr(rho w) - tr(rho pi(w))|.  ``full_max_violation`` additionally
    tests condition-(1)-style equality under *all* permutations, which
    detects states that are invariant but not fully invariant.
    """

    condition1_max_violation: float
    condition2_max_violation: float
    checked_words: int
    fully_invariant: bool
    full_max_violation: float
    sampled: bool

    def max_violation(self) -> float:
        return max(self.condition1_max_violation,
                   self.condition2_max_violation)


def mu_family_state(params: MuFamilyParams,
                    validate: bool = True) -> OperatorExpansion:
    """Operator (1/2^(pV)) (1 + i tan(pi/2V) mu sum_{j<l} m_j^1 m_l^1).

    The expansion is permutation invariant (but not fully invariant) for
    every mu, with pair correlators +/- i tan(pi/2V) mu depending on the
    index order.  The prefactor tan(pi/2V) saturates the single-particle
    covariance constraint, but the many-body operator is positive
    semidefinite only for |mu| <= 1 / (tan(pi/2V) * g(V)) where g(V) is
    the sum of the positive singular values of the coupling pattern
    (g(6) = 5, so at V = 6 positivity ends near |mu| = 0.746).  With
    ``validate`` set, construction outside that range raises and reports
    the offending minimum eigenvalue; pass ``validate=False`` to build the
    Hermitian unit-trace operator anyway, e.g. for bound certifications
    that do not require positivity.
    """
    shape = params.shape
    dim = shape.fock_dim
    terms: Dict[int, complex] = {0: 1.0 / dim}
    t = math.tan(math.pi / (2 * params.sites))
    coeff = 1j * t * params.mu / dim
    if abs(params.mu) > 0:
        for j in range(1, params.sites + 1):
            for l in range(j + 1, params.sites + 1):
                mask = ((1 << shape.bit_position(j, 1))
                        | (1 << shape.bit_position(l, 1)))
                terms[mask] = coeff
    state = OperatorExpansion(shape, terms)
    if validate and abs(params.mu) > 0:
        dense = to_matrix(state)
        min_eig = float(np.linalg.eigvalsh(dense.matrix)[0])
        if min_eig < -1e-10:
            raise ValueError(
                f"mu-family operator is not positive at {params}: "
                f"min eigenvalue {min_eig:.3e}; reduce |mu| or pass "
                "validate=False to build it as a non-state test operator")
    return state


def is_order_preserving(pi: Sequence[int], mask: int,
                        shape: SystemShape) -> bool:
    """Whether applying ``pi`` to the word's site labels leaves the index
    sequence strictly increasing."""
    pi = validate_permutation(pi, shape.sites)
    width = 2 * shape.modes_per_site
    prev = -1
    rem = mask
    while rem:
        low = rem & -rem
        g = low.bit_length() - 1
        site, r = divmod(g, width)
        mapped = (pi[site] - 1) * width + r
        if mapped <= prev:
            return False
        prev = mapped
        rem ^= low
    return True


def words_up_to_degree(shape: SystemShape, cap: int) -> Iterable[int]:
    """All canonical word bitmasks with degree <= cap (identity included)."""
    nbits = shape.majorana_count
    for degree in range(0, min(cap, nbits) + 1):
        for combo in itertools.combinations(range(nbits), degree):
            mask = 0
            for pos in combo:
                mask |= 1 << pos
            yield mask


def _mapped_word(pi: Tuple[int, ...], mask: int, width: int):
    """Mapped bit positions of a word (in original written order) plus the
    resulting mask and whether the order was preserved."""
    mapped = []
    mapped_mask = 0
    ordered = True
    prev = -1
    rem = mask
    while rem:
        low = rem & -rem
        g = low.bit_length() - 1
        site, r = divmod(g, width)
        pos = (pi[site] - 1) * width + r
        mapped.append(pos)
        mapped_mask |= 1 << pos
        if pos <= prev:
            ordered = False
        prev = pos
        rem ^= low
    return mapped, mapped_mask, ordered


def check_invariance(rho: OperatorExpansion, word_degree_cap: int = 4,
                     tol: float = 1e-9, exhaustive: Optional[bool] = None,
                     n_samples: int = 20000, seed: int = 7) -> InvarianceReport:
    """Check both invariance conditions on an expansion.

    Exhaustive mode enumerates every word up to the degree cap against
    every site permutation; it is the default up to 6 sites.  Larger
    systems fall back to seeded random sampling of (word, permutation)
    pairs, always including the words actually present in ``rho``.
    """
    shape = rho.shape
    V = shape.sites
    width = 2 * shape.modes_per_site
    if exhaustive is None:
        exhaustive = V <= 6
    support = rho.terms.keys()

    if exhaustive:
        perms = [tuple(q + 1 for q in perm)
                 for perm in itertools.permutations(range(V))]
        words = list(words_up_to_degree(shape, word_degree_cap))
        pairs: Iterable[Tuple[int, Tuple[int, ...]]] = (
            (w, pi) for w in words for pi in perms)
        checked_words = len(words)
    else:
        rng = np.random.default_rng(seed)
        nbits = shape.majorana_count
        sampled_words = set(support)
        while len(sampled_words) < max(n_samples // 20, 50):
            degree = int(rng.integers(1, word_degree_cap + 1))
            mask = 0
            for pos in rng.choice(nbits, size=degree, replace=False):
                mask |= 1 << int(pos)
            sampled_words.add(mask)
        words = sorted(sampled_words)
        pair_list = []
        for _ in range(n_samples):
            w = words[int(rng.integers(0, len(words)))]
            pi = tuple(int(x) + 1 for x in rng.permutation(V))
            pair_list.append((w, pi))
        # Every support word against a fixed batch of permutations.
        for w in sorted(support):
            for _ in range(200):
                pi = tuple(int(x) + 1 for x in rng.permutation(V))
                pair_list.append((w, pi))
        pairs = pair_list
        checked_words = len(words)

    cond1 = 0.0
    cond2 = 0.0
    full = 0.0
    expect_cache: Dict[int, complex] = {}

    def expect(mask: int) -> complex:
        val = expect_cache.get(mask)
        if val is None:
            val = rho.expectation(mask)
            expect_cache[mask] = val
        return val

    for w, pi in pairs:
        e_w = expect(w)
        mapped, mapped_mask, ordered = _mapped_word(pi, w, width)
        if e_w == 0.0 and mapped_mask not in support:
            continue
        sign, canon = canonicalize_positions(mapped)
        assert canon == mapped_mask
        diff = abs(e_w - sign * expect(mapped_mask))
        if diff > full:
            full = diff
        if ordered and diff > cond1:
            cond1 = diff
        if diff > cond2 and even_on_all_sites(w, shape):
            cond2 = diff

    return InvarianceReport(cond1, cond2, checked_words, full < tol, full,
                            not exhaustive)


def check_invariance_dense(rho: DenseOperator, word_degree_cap: int = 4,
                           n_samples: int = 4000, seed: int = 11,
                           tol: float = 1e-8) -> InvarianceReport:
    """Sampled invariance check driven by matrix expectation values.

    Used for states only available as dense matrices (exact ground states),
    where converting to a full expansion would be wasteful.
    """
    shape = rho.shape
    V = shape.sites
    width = 2 * shape.modes_per_site
    nbits = shape.majorana_count
    rng = np.random.default_rng(seed)
    expect_cache: Dict[int, complex] = {}

    def expect(mask: int) -> complex:
        val = expect_cache.get(mask)
        if val is None:
            val = expectation_word_dense(rho.matrix, mask, shape)
            expect_cache[mask] = val
        return val

    cond1 = 0.0
    cond2 = 0.0
    full = 0.0
    words_seen = set()
    for _ in range(n_samples):
        degree = int(rng.integers(1, word_degree_cap + 1))
        mask = 0
        for pos in rng.choice(nbits, size=degree, replace=False):
            mask |= 1 << int(pos)
        words_seen.add(mask)
        pi = tuple(int(x) + 1 for x in rng.permutation(V))
        mapped, mapped_mask, ordered = _mapped_word(pi, mask, width)
        sign, _ = canonicalize_positions(mapped)
        diff = abs(expect(mask) - sign * expect(mapped_mask))
        if diff > full:
            full = diff
        if ordered and diff > cond1:
            cond1 = diff
        if diff > cond2 and even_on_all_sites(mask, shape):
            cond2 = diff
    return InvarianceReport(cond1, cond2, len(words_seen), full < tol, full,
                            True)


def lemma3_bound(V: int, p: int, k: int) -> float:
    """Trace-norm suppression bound (2/sqrt(3)) 4^p (k-1)^(3/2) / V."""
    return (2.0 / math.sqrt(3.0)) * (4.0 ** p) * (k - 1) ** 1.5 / V


def verify_lemma3(rho: OperatorExpansion, k: int, tol: float = 1e-9,
                  invariance_tol: float = 1e-9,
                  inv_report: Optional[InvarianceReport] = None,
                  inputs: Optional[Dict[str, object]] = None) -> VerificationReport:
    """Certify the trace-norm suppression bound on the first-k-sites
    reduction.

    lhs = || tr_{>k}(rho) - tr_{>k}(C(rho)) ||_1 with C the even-parity
    channel; rhs is :func:`lemma3_bound`.  The reduction difference is
    assembled symbolically, so a vanishing difference (k = 1, or states
    already even) yields lhs = 0 exactly.
    """
    start = time.perf_counter()
    shape = rho.shape
    V, p = shape.sites, shape.modes_per_site
    problems = []
    if V < 6:
        problems.append(f"V = {V} below the required 6 sites")
    if not 1 <= k < V:
        problems.append(f"k = {k} outside [1, V)")
    if problems:
        raise ValueError("; ".join(problems))
    if inv_report is None:
        inv_report = check_invariance(rho, tol=invariance_tol)
    if inv_report.max_violation() > invariance_tol:
        raise ValueError(
            "state is not permutation invariant: max violation "
            f"{inv_report.max_violation():.3e} > {invariance_tol:.1e}")

    reduced = reduce_expansion(rho, range(1, k + 1))
    diff = reduced - reduced.even_channel()
    if not diff.terms:
        lhs = 0.0
    else:
        lhs = trace_norm(to_matrix(diff))
    rhs = lemma3_bound(V, p, k)
    notes = []
    if inv_report.sampled:
        notes.append("invariance checked by sampling")
    info: Dict[str, object] = {"V": V, "p": p, "k": k}
    if inputs:
        info.update(inputs)
    return make_report("lemma3", INEQUALITY, info, lhs, rhs, tol,
                       time.perf_counter() - start, notes)
