"""Command-line runner for the certification suites.

Exit codes: 0 all claims passed, 1 at least one claim failed, 2 usage or
configuration error, 3 resource cap exceeded.  Every numeric output lands
in CSV tables whose bytes depend only on the configuration and seed; the
mode cap can be lifted through the FERMICERT_MAX_MODES environment
variable.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .algebra import SystemShape, expansion_from_text
from .definetti import mixture_diagnostics, verify_theorem1
from .errors import ResourceCapError, SingularSpectrumError
from .invariance import (MuFamilyParams, check_invariance, mu_family_state,
                         verify_lemma3)
from .meanfield import (BUILTIN_FAMILIES, HamiltonianSpec, builtin_family,
                        verify_gs_bound)
from .rdm import (CirculantParams, circulant_matrix,
                  circulant_spectrum_with_fallback)
from .report import (INEQUALITY, make_report, render_reports,
                     reports_to_rows, write_csv)
from . import suites

_CSV_DOC = """\
CSV tables written by this command (columns):
  summary.csv: claim_id, kind, inputs, lhs, rhs, tolerance, passed, notes
"""

_TABLE_DOCS = {
    "check-algebra": "  algebra.csv: shape, cases, max_dev\n",
    "check-invariance": ("  invariance.csv: V, mu, cond1, cond2, full, "
                         "fully_invariant, checked_words, sampled\n"),
    "verify-lemma3": "  lemma3.csv: V, p, mu, k, lhs, rhs, passed\n",
    "verify-theorem1": ("  theorem1.csv: V, p, mu, k, r, distance, bound, "
                        "max_offdiag, passed\n"),
    "verify-clt": ("  clt_lemma4.csv: V, p, w, cases, max_dev\n"
                   "  clt_delta.csv: V, p, max_offresonant, max_resonant_dev\n"
                   "  suppression.csv: V, p, w, lhs, rhs, equality_dev, passed\n"),
    "verify-corollary": "  corollary.csv: source, V, k, metric, rate, ratio\n",
    "rdm-spectrum": ("  rdm_spectrum.csv: V, k, lambda_formula, "
                     "lambda_direct, abs_dev\n"
                     "  rdm_bound.csv: V, mu, a, abs_b, abs_b_times_V, bound, "
                     "passed\n"),
    "gs-bound": ("  gsbound.csv: family, V, p, k, e_product_min, e_ground, "
                 "gap, bound, precondition_ok, passed\n"),
}


def _load_state(args) -> "OperatorExpansion":
    """Build the requested state.

    The bound certifications are stated for permutation-invariant inputs
    and run on the Hermitian unit-trace operator, so positivity is only
    enforced with --strict-state; otherwise a failing minimum eigenvalue
    is surfaced as a report note by the caller.
    """
    if args.fixture is not None:
        path = Path(args.fixture)
        if not path.exists():
            raise FileNotFoundError(f"fixture not found: {path}")
        shape = SystemShape(args.V, args.p)
        return expansion_from_text(path.read_text(), shape)
    if args.family == "mu":
        params = MuFamilyParams(args.V, args.p, args.mu)
        return mu_family_state(params, validate=args.strict_state)
    raise ValueError(f"unknown state family {args.family!r}")


def _positivity_note(state) -> List[str]:
    from .fock import check_state, to_matrix
    validity = check_state(to_matrix(state))
    if validity.positive_ok:
        return []
    return [f"input operator is not positive (min eigenvalue "
            f"{validity.min_eigenvalue:.3e}); bound certified for the "
            "Hermitian unit-trace operator"]


def _write_outputs(out: Path, command: str, reports, tables):
    out.mkdir(parents=True, exist_ok=True)
    text = render_reports(f"{command} (fermicert)", reports)
    (out / f"{command}.txt").write_text(text)
    header, rows = reports_to_rows(reports)
    write_csv(out / "summary.csv", header, rows)
    for name, (table_header, table_rows) in tables.items():
        write_csv(out / f"{name}.csv", table_header, table_rows)
    sys.stdout.write(text)


def _exit_code(reports) -> int:
    return 0 if all(r.passed for r in reports) else 1


def _add_state_args(sub, with_k: bool = True):
    sub.add_argument("--family", default="mu", choices=["mu"],
                     help="built-in state family")
    sub.add_argument("--V", type=int, default=None, help="number of sites")
    sub.add_argument("--p", type=int, default=1, help="modes per site")
    sub.add_argument("--mu", type=float, default=1.0,
                     help="mu parameter of the family")
    sub.add_argument("--fixture", default=None,
                     help="expansion text fixture instead of a family")
    sub.add_argument("--strict-state", action="store_true",
                     help="reject family parameters outside the positivity "
                          "range instead of certifying the Hermitian operator")
    if with_k:
        sub.add_argument("--k", type=int, default=None,
                         help="reduction size (omit to sweep the suite)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fermicert",
        description="Desk-scale certification of permutation-invariant "
                    "fermionic mode states.",
        epilog="Mode cap override: set FERMICERT_MAX_MODES (default 12).")
    parser.add_argument("--out", default="reports",
                        help="output directory for reports and CSV tables")
    subs = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, seed_required=False):
        sub = subs.add_parser(
            name, help=help_text,
            formatter_class=argparse.RawDescriptionHelpFormatter,
            epilog=_CSV_DOC + _TABLE_DOCS.get(name, ""))
        if seed_required:
            sub.add_argument("--seed", type=int, required=True,
                             help="RNG seed (required: optimizer command)")
        else:
            sub.add_argument("--seed", type=int, default=0, help="RNG seed")
        return sub

    add("check-algebra", "symbolic algebra against the dense oracle")
    add("check-invariance", "permutation-invariance definition checks")

    lem = add("verify-lemma3", "trace-norm suppression certification")
    _add_state_args(lem)

    th = add("verify-theorem1", "product-mixture approximation certification",
             seed_required=True)
    _add_state_args(th)
    th.add_argument("--restarts", type=int, default=8)
    th.add_argument("--iters", type=int, default=500)
    th.add_argument("--r", type=int, default=None,
                    help="number of mixture components")

    add("verify-clt", "Fourier-cumulant factorization and suppression")
    add("verify-corollary", "Gaussian-mixture deviation scaling",
        seed_required=True)

    rdm = add("rdm-spectrum", "closed-form 1-RDM spectra against the "
                              "eigensolver")
    rdm.add_argument("--V", type=int, default=None)
    rdm.add_argument("--a", type=float, default=None,
                     help="diagonal entry (N/V)")
    rdm.add_argument("--b-re", type=float, default=0.0)
    rdm.add_argument("--b-im", type=float, default=0.0)

    gs = add("gs-bound", "mean-field energy-gap certification",
             seed_required=True)
    gs.add_argument("--hamiltonian", default=None,
                    choices=list(BUILTIN_FAMILIES),
                    help="built-in family (omit to sweep all at V=6)")
    gs.add_argument("--V", type=int, default=6)
    gs.add_argument("--config", default=None,
                    help="JSON Hamiltonian spec (template as expansion "
                         "text; subsets list or 'all-k-subsets')")
    gs.add_argument("--restarts", type=int, default=8)
    gs.add_argument("--iters", type=int, default=3)

    add("all", "every suite, fixed order", seed_required=True)
    return parser


def _single_lemma3(args) -> int:
    state = _load_state(args)
    rep = verify_lemma3(state, args.k, inputs={"mu": args.mu})
    rep.notes.extend(_positivity_note(state))
    _write_outputs(Path(args.out), "verify-lemma3", [rep], {})
    return _exit_code([rep])


def _single_theorem1(args) -> int:
    state = _load_state(args)
    rep, mixture = verify_theorem1(
        state, args.k, r=args.r, restarts=args.restarts, iters=args.iters,
        seed=args.seed, inputs={"mu": args.mu},
        require_state=args.strict_state)
    diag = mixture_diagnostics(mixture)
    rep.notes.append(f"component purities {diag['purities']}")
    rep.notes.extend(_positivity_note(state))
    _write_outputs(Path(args.out), "verify-theorem1", [rep], {})
    return _exit_code([rep])


def _single_rdm(args) -> int:
    params = CirculantParams(args.V, args.a, complex(args.b_re, args.b_im))
    values, singular = circulant_spectrum_with_fallback(params)
    direct = np.sort(np.linalg.eigvalsh(circulant_matrix(params)))
    formula = np.sort(values)
    rows = []
    worst = 0.0
    for k in range(args.V):
        dev = abs(formula[k] - direct[k])
        rows.append([args.V, k, formula[k], direct[k], dev])
        if k not in singular:
            worst = max(worst, dev)
    rep = make_report("rdm-spectrum", INEQUALITY,
                      {"V": args.V, "a": args.a,
                       "b": complex(args.b_re, args.b_im)},
                      worst, 0.0, 1e-10, 0.0,
                      [f"singular k excluded: {singular}"] if singular else [])
    _write_outputs(Path(args.out), "rdm-spectrum", [rep],
                   {"rdm_spectrum": (["V", "k", "lambda_formula",
                                      "lambda_direct", "abs_dev"], rows)})
    return _exit_code([rep])


def _hamiltonian_from_config(path: Path) -> HamiltonianSpec:
    if not path.exists():
        raise FileNotFoundError(f"config not found: {path}")
    cfg = json.loads(path.read_text())
    for key in ("V", "p", "k", "template"):
        if key not in cfg:
            raise ValueError(f"config is missing the key {key!r}")
    V, p, k = int(cfg["V"]), int(cfg["p"]), int(cfg["k"])
    shape = SystemShape(V, p)
    template = expansion_from_text(cfg["template"], SystemShape(k, p))
    subsets_cfg = cfg.get("subsets", "all-k-subsets")
    if subsets_cfg == "all-k-subsets":
        subsets = tuple(itertools.combinations(range(1, V + 1), k))
    else:
        subsets = tuple(tuple(int(s) for s in sub) for sub in subsets_cfg)
    return HamiltonianSpec(shape, subsets, template,
                           normalize=bool(cfg.get("normalize", False)),
                           name=str(cfg.get("name", "custom")))


def _single_gs(args) -> int:
    if args.config is not None:
        spec = _hamiltonian_from_config(Path(args.config))
    else:
        spec = builtin_family(args.hamiltonian, args.V)
    result, rep = verify_gs_bound(spec, restarts=args.restarts,
                                  iters=args.iters, seed=args.seed)
    rows = [[spec.name, spec.shape.sites, spec.shape.modes_per_site, spec.k,
             result.e_product_min, result.e_ground, result.gap, result.bound,
             result.precondition_ok, rep.passed]]
    header = ["family", "V", "p", "k", "e_product_min", "e_ground", "gap",
              "bound", "precondition_ok", "passed"]
    _write_outputs(Path(args.out), "gs-bound", [rep],
                   {"gsbound": (header, rows)})
    return _exit_code([rep])


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Path(args.out)
    try:
        if args.command == "verify-lemma3" and args.k is not None:
            return _single_lemma3(args)
        if args.command == "verify-theorem1" and args.k is not None:
            return _single_theorem1(args)
        if args.command == "rdm-spectrum" and args.a is not None:
            if args.V is None:
                raise ValueError("--V is required with --a")
            return _single_rdm(args)
        if args.command == "gs-bound" and (args.hamiltonian is not None
                                           or args.config is not None):
            return _single_gs(args)

        if args.command == "all":
            start = time.perf_counter()
            reports, tables = suites.run_all(seed=args.seed)
            _write_outputs(out, "all", reports, tables)
            sys.stdout.write(f"total wall time {time.perf_counter() - start:.1f}s\n")
            return _exit_code(reports)
        runner = suites.SUITES.get(args.command)
        if runner is None:
            raise ValueError(f"unknown command {args.command!r}")
        reports, tables = runner(args.seed)
        _write_outputs(out, args.command, reports, tables)
        return _exit_code(reports)
    except ResourceCapError as exc:
        sys.stderr.write(f"resource cap: {exc}\n")
        return 3
    except (ValueError, FileNotFoundError, SingularSpectrumError,
            json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
