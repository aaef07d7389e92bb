"""Convex mixtures of mode product states and the reduction-approximation
certificate.

The main entry point, :func:`verify_theorem1`, certifies that the first-k
reduction of a permutation-invariant state is within the stated trace-norm
bound of a convex mixture sum_l a_l xi_l^(x k) of k-fold copies of
single-site states.  The witness mixture is produced by
:func:`best_mixture_approx`: alternating minimization with projected
subgradient steps on the weight simplex and derivative-free coordinate
descent on the single-site components.  Components are parametrized inside
the even (parity-superselected) sector by construction, diagonal occupation
for one mode per site and a Gibbs form over even Hermitian generators
otherwise, so every witness is automatically a physical state.

The optimizer returns an upper bound on the true minimum, which is the
right direction for certification: a pass is a genuine certificate.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algebra import OperatorExpansion, SystemShape, reversal_sign
from .errors import ResourceCapError
from .fock import (DenseOperator, check_state, ensure_within_cap,
                   global_parity_signs, jw_matrix, partial_trace_sites,
                   reduce_expansion, to_matrix)
from .invariance import InvarianceReport, check_invariance, lemma3_bound
from .report import INEQUALITY, VerificationReport, make_report

#: Default subgradient step scale c in c/sqrt(t).
STEP_SCALE = 0.5

#: Gibbs generator coefficients are searched inside this box.
GENERATOR_BOX = 6.0


@dataclass(frozen=True, eq=False)
class SingleSiteState:
    """Density matrix on one site (2^p dimensional) with its parity flag."""

    matrix: np.ndarray
    even: bool

    @property
    def modes(self) -> int:
        return int(round(math.log2(self.matrix.shape[0])))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@dataclass(frozen=True, eq=False)
class ProductMixture:
    """Convex mixture sum_l weights[l] * components[l]^(x k)."""

    weights: np.ndarray
    components: Tuple[SingleSiteState, ...]

    def __post_init__(self):
        if len(self.weights) != len(self.components):
            raise ValueError("weights and components must have equal length")
        if np.any(self.weights < -1e-12):
            raise ValueError("negative mixture weight")
        if abs(float(np.sum(self.weights)) - 1.0) > 1e-9:
            raise ValueError("mixture weights must sum to 1")


def site_parity_diagonal(p: int) -> np.ndarray:
    return global_parity_signs(SystemShape(1, p))


def even_projection(matrix: np.ndarray, p: int) -> np.ndarray:
    """Pinch onto the even sector: (M + P M P)/2 with P the site parity."""
    signs = site_parity_diagonal(p)
    return 0.5 * (matrix + signs[:, None] * matrix * signs[None, :])


def is_even_operator(matrix: np.ndarray, p: int, tol: float = 1e-10) -> bool:
    return float(np.max(np.abs(matrix - even_projection(matrix, p)))) < tol


def even_hermitian_basis(p: int) -> List[np.ndarray]:
    """Hermitian matrices spanning the traceless even single-site operators.

    One basis element per even word of positive degree: the word itself when
    it is Hermitian, i times the word when it is anti-Hermitian.
    """
    shape = SystemShape(1, p)
    basis = []
    for mask in range(1, 1 << (2 * p)):
        if mask.bit_count() % 2:
            continue
        mat = jw_matrix(mask, shape).matrix
        if reversal_sign(mask.bit_count()) < 0:
            mat = 1j * mat
        basis.append(mat)
    return basis


def n_component_params(p: int) -> int:
    return 1 if p == 1 else (1 << (2 * p - 1)) - 1


def component_state(p: int, params: np.ndarray) -> SingleSiteState:
    """Build an even single-site state from optimizer parameters.

    p = 1: one occupation parameter alpha, state diag(alpha, 1 - alpha).
    p > 1: Gibbs state exp(G)/tr exp(G) of the parametrized even Hermitian
    generator G; stays in the superselected sector by construction.
    """
    if p == 1:
        alpha = float(min(max(params[0], 0.0), 1.0))
        mat = np.diag([alpha, 1.0 - alpha]).astype(np.complex128)
        return SingleSiteState(mat, True)
    basis = even_hermitian_basis(p)
    if len(params) != len(basis):
        raise ValueError(f"expected {len(basis)} parameters, got {len(params)}")
    gen = np.zeros((1 << p, 1 << p), dtype=np.complex128)
    for theta, h in zip(params, basis):
        gen += float(theta) * h
    w, v = np.linalg.eigh(gen)
    boltz = np.exp(w - w.max())
    boltz /= boltz.sum()
    mat = (v * boltz) @ v.conj().T
    return SingleSiteState(mat, True)


def params_from_state(p: int, sigma: np.ndarray) -> np.ndarray:
    """Invert :func:`component_state` approximately (moment matching).

    The input is pinched onto the even sector and regularized before taking
    the matrix logarithm, so any density matrix is a valid seed.
    """
    sig = even_projection(np.asarray(sigma, dtype=np.complex128), p)
    sig = 0.5 * (sig + sig.conj().T)
    if p == 1:
        alpha = float(np.real(sig[0, 0]))
        tr = float(np.real(np.trace(sig)))
        if tr > 1e-12:
            alpha /= tr
        return np.array([min(max(alpha, 0.0), 1.0)])
    dim = sig.shape[0]
    w, v = np.linalg.eigh(sig)
    w = np.maximum(w, 1e-12)
    w /= w.sum()
    log_sig = (v * np.log(w)) @ v.conj().T
    basis = even_hermitian_basis(p)
    theta = np.array([float(np.real(np.trace(h @ log_sig))) / dim
                      for h in basis])
    return np.clip(theta, -GENERATOR_BOX, GENERATOR_BOX)


def product_power(xi: SingleSiteState, k: int,
                  override_cap: bool = False) -> DenseOperator:
    """k-fold copy of a single-site state as a Fock-space density matrix.

    Under the site-major operator ordering the copy is the plain tensor
    power, and mixed-site correlations of even states factorize.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    p = xi.modes
    shape = SystemShape(k, p)
    ensure_within_cap(shape, override_cap)
    out = np.array([[1.0 + 0.0j]])
    for _ in range(k):
        out = np.kron(out, xi.matrix)
    return DenseOperator(shape, out)


def mixture_matrix(mixture: ProductMixture, k: int) -> DenseOperator:
    """Dense matrix of sum_l a_l xi_l^(x k)."""
    powers = [product_power(xi, k) for xi in mixture.components]
    out = np.zeros_like(powers[0].matrix)
    for a, powr in zip(mixture.weights, powers):
        out += a * powr.matrix
    return DenseOperator(powers[0].shape, out)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, len(v) + 1)
    cond = u * idx > (css - 1.0)
    rho = int(np.nonzero(cond)[0][-1])
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _tracenorm_and_sign(delta: np.ndarray):
    herm = 0.5 * (delta + delta.conj().T)
    w, v = np.linalg.eigh(herm)
    dist = float(np.sum(np.abs(w)))
    sign = (v * np.sign(w)) @ v.conj().T
    return dist, sign


class _MixtureOptimizer:
    """Alternating minimization of || R - sum_l a_l xi_l^(x k) ||_1."""

    def __init__(self, target: np.ndarray, k: int, p: int, r: int,
                 iters: int, component_every: int = 25,
                 grid_points: int = 9, golden_iters: int = 22):
        self.target = target
        self.k = k
        self.p = p
        self.r = r
        self.iters = iters
        self.component_every = component_every
        self.grid_points = grid_points
        self.golden_iters = golden_iters
        if p == 1:
            self.lo, self.hi = 0.0, 1.0
        else:
            self.lo, self.hi = -GENERATOR_BOX, GENERATOR_BOX
        self.n_params = n_component_params(p)

    def _power(self, params: np.ndarray) -> np.ndarray:
        xi = component_state(self.p, params)
        return product_power(xi, self.k).matrix

    def _distance(self, weights, powers):
        mix = np.zeros_like(self.target)
        for a, x in zip(weights, powers):
            mix += a * x
        return _tracenorm_and_sign(self.target - mix)

    def _coordinate_sweep(self, weights, params, powers, best):
        for l in range(self.r):
            for j in range(self.n_params):
                base = params[l][j]

                def value(x: float) -> float:
                    trial = params[l].copy()
                    trial[j] = x
                    saved = powers[l]
                    powers[l] = self._power(trial)
                    d, _ = self._distance(weights, powers)
                    powers[l] = saved
                    return d

                grid = np.linspace(self.lo, self.hi, self.grid_points)
                cand = list(grid) + [base]
                vals = [value(x) for x in cand]
                center = cand[int(np.argmin(vals))]
                span = (self.hi - self.lo) / (self.grid_points - 1)
                a = max(self.lo, center - span)
                b = min(self.hi, center + span)
                invphi = (math.sqrt(5.0) - 1.0) / 2.0
                c1 = b - invphi * (b - a)
                c2 = a + invphi * (b - a)
                f1, f2 = value(c1), value(c2)
                for _ in range(self.golden_iters):
                    if f1 <= f2:
                        b, c2, f2 = c2, c1, f1
                        c1 = b - invphi * (b - a)
                        f1 = value(c1)
                    else:
                        a, c1, f1 = c1, c2, f2
                        c2 = a + invphi * (b - a)
                        f2 = value(c2)
                x_best = c1 if f1 <= f2 else c2
                v_best = min(f1, f2)
                if v_best < best - 1e-15:
                    params[l][j] = x_best
                    powers[l] = self._power(params[l])
                    best = v_best
        return best

    def run(self, weights: np.ndarray, params: List[np.ndarray]):
        weights = project_simplex(np.asarray(weights, dtype=float))
        params = [np.asarray(q, dtype=float).copy() for q in params]
        powers = [self._power(q) for q in params]
        dist, sign = self._distance(weights, powers)
        best = dist
        best_state = (weights.copy(), [q.copy() for q in params])
        if best < 5e-12:
            return best, best_state
        stall = 0
        for t in range(1, self.iters + 1):
            grad = np.array([-float(np.real(np.sum(sign.conj() * x)))
                             for x in powers])
            weights = project_simplex(weights - (STEP_SCALE / math.sqrt(t)) * grad)
            dist, sign = self._distance(weights, powers)
            if dist < best - 1e-13:
                best = dist
                best_state = (weights.copy(), [q.copy() for q in params])
            if t % self.component_every == 0:
                before = best
                best = self._coordinate_sweep(weights, params, powers, best)
                if best < before - 1e-13:
                    best_state = (weights.copy(), [q.copy() for q in params])
                    dist, sign = self._distance(weights, powers)
                    stall = 0
                else:
                    stall += 1
                if best < 5e-12 or stall >= 2:
                    break
        return best, best_state


def best_mixture_approx(rho_k: DenseOperator, r: Optional[int] = None,
                        restarts: int = 8, iters: int = 500, seed: int = 0,
                        warm: Optional[ProductMixture] = None,
                        require_state: bool = True
                        ) -> Tuple[ProductMixture, float]:
    """Best found convex product-power mixture and its trace-norm distance.

    Deterministic for a fixed seed.  The first two starts are structured
    (single-site marginal of the target, maximally mixed); the rest are
    random.  The returned distance upper-bounds the true minimum.
    """
    shape = rho_k.shape
    k, p = shape.sites, shape.modes_per_site
    if require_state:
        validity = check_state(rho_k)
        if not (validity.trace_ok and validity.positive_ok):
            raise ValueError(
                f"target is not a valid state: trace={validity.trace_value}, "
                f"min eigenvalue={validity.min_eigenvalue:.3e}")
    if r is None:
        r = 2 * p + 2
    n_par = n_component_params(p)
    rng = np.random.default_rng(seed)
    opt = _MixtureOptimizer(rho_k.matrix, k, p, r, iters)

    marginal = partial_trace_sites(rho_k, [1]).matrix
    seed_params = params_from_state(p, marginal)
    mixed_params = (np.array([0.5]) if p == 1 else np.zeros(n_par))

    starts = [
        (np.full(r, 1.0 / r), [seed_params.copy() for _ in range(r)]),
        (np.full(r, 1.0 / r), [mixed_params.copy() for _ in range(r)]),
    ]
    while len(starts) < restarts:
        w0 = rng.random(r) + 0.1
        w0 /= w0.sum()
        if p == 1:
            pars = [rng.random(1) for _ in range(r)]
        else:
            pars = [rng.uniform(-1.0, 1.0, n_par) for _ in range(r)]
        starts.append((w0, pars))
    if warm is not None:
        w0 = np.zeros(r)
        pars = []
        for i in range(r):
            if i < len(warm.weights):
                w0[i] = warm.weights[i]
                pars.append(params_from_state(p, warm.components[i].matrix))
            else:
                pars.append(mixed_params.copy())
        w0 = project_simplex(w0)
        starts.insert(0, (w0, pars))

    best = math.inf
    best_state = None
    for w0, pars in starts[:max(restarts, len(starts))]:
        dist, state = opt.run(w0, pars)
        if dist < best - 1e-15:
            best = dist
            best_state = state
        if best < 5e-12:
            break

    weights, params = best_state
    comps = tuple(component_state(p, q) for q in params)
    weights = weights / weights.sum()
    return ProductMixture(weights, comps), float(best)


def mixture_diagnostics(mixture: ProductMixture) -> Dict[str, object]:
    """State validity, parity and diagonality diagnostics per component."""
    p = mixture.components[0].modes
    shape1 = SystemShape(1, p)
    all_ok = True
    all_even = True
    max_offdiag = 0.0
    purities = []
    for xi in mixture.components:
        validity = check_state(DenseOperator(shape1, xi.matrix))
        all_ok &= validity.trace_ok and validity.positive_ok
        all_even &= validity.parity_ok and is_even_operator(xi.matrix, p)
        off = xi.matrix - np.diag(np.diag(xi.matrix))
        max_offdiag = max(max_offdiag, float(np.max(np.abs(off))))
        purities.append(xi.purity())
    return {
        "components_valid": bool(all_ok),
        "components_even": bool(all_even),
        "max_offdiagonal": max_offdiag,
        "purities": purities,
    }


def theorem1_bound(V: int, p: int, k: int) -> float:
    """Stated mixture-approximation bound: suppression term plus 2*4^p*k/V."""
    return lemma3_bound(V, p, k) + 2.0 * (4.0 ** p) * k / V


def theorem1_bound_tight_spin(V: int, p: int, k: int) -> float:
    """Variant with the 2^p spin-side constant, reported for comparison."""
    return lemma3_bound(V, p, k) + 2.0 * (2.0 ** p) * k / V


def verify_theorem1(rho: OperatorExpansion, k: int, r: Optional[int] = None,
                    restarts: int = 8, iters: int = 500, seed: int = 0,
                    tol: float = 1e-9, invariance_tol: float = 1e-9,
                    inv_report: Optional[InvarianceReport] = None,
                    inputs: Optional[Dict[str, object]] = None,
                    require_state: bool = True
                    ) -> Tuple[VerificationReport, ProductMixture]:
    """Certify the product-mixture approximation bound on the first-k
    reduction, returning the report and the witness mixture."""
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
            f"{inv_report.max_violation():.3e}")

    reduction = to_matrix(reduce_expansion(rho, range(1, k + 1)))
    mixture, dist = best_mixture_approx(reduction, r=r, restarts=restarts,
                                        iters=iters, seed=seed,
                                        require_state=require_state)
    rhs = theorem1_bound(V, p, k)
    notes = [
        f"suppression term {lemma3_bound(V, p, k):.6g}",
        f"tight spin-constant variant rhs {theorem1_bound_tight_spin(V, p, k):.6g}",
    ]
    if rhs > 2.0:
        notes.append("bound exceeds trace-distance diameter")
    diag = mixture_diagnostics(mixture)
    if not diag["components_valid"] or not diag["components_even"]:
        notes.append("component validity check failed")
    if p == 1:
        notes.append(f"max component off-diagonal {diag['max_offdiagonal']:.2e}")
    info: Dict[str, object] = {"V": V, "p": p, "k": k,
                               "r": len(mixture.weights), "seed": seed}
    if inputs:
        info.update(inputs)
    report = make_report("theorem1", INEQUALITY, info, dist, rhs, tol,
                         time.perf_counter() - start, notes)
    return report, mixture


# -- mixture fixture serialization -------------------------------------------

def mixture_to_text(mixture: ProductMixture) -> str:
    """Serialize weights then one matrix block per component."""
    p = mixture.components[0].modes
    dim = 1 << p
    lines = [" ".join(f"{w:.17g}" for w in mixture.weights)]
    for xi in mixture.components:
        for row in xi.matrix:
            lines.append(" ".join(
                f"{z.real:.17g} {z.imag:.17g}" for z in row))
    lines.append(f"# dim={dim}")
    return "\n".join(lines) + "\n"


def mixture_from_text(text: str, p: int) -> ProductMixture:
    lines = [ln for ln in text.splitlines()
             if ln.strip() and not ln.startswith("#")]
    dim = 1 << p
    weights = np.array([float(x) for x in lines[0].split()])
    comps = []
    pos = 1
    for _ in range(len(weights)):
        rows = []
        for i in range(dim):
            vals = [float(x) for x in lines[pos + i].split()]
            arr = np.asarray(vals).reshape(dim, 2)
            rows.append(arr[:, 0] + 1j * arr[:, 1])
        pos += dim
        mat = np.array(rows)
        comps.append(SingleSiteState(mat, is_even_operator(mat, p)))
    return ProductMixture(weights, tuple(comps))
