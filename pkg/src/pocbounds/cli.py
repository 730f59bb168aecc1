"""Command line surface: bound computation, simulation sweeps, oracle queries.

Exit codes are a stable contract: 0 success, 2 malformed input (schema), 3
inconsistent or insufficient evidence, 4 infeasible program, 5 undefined
query (conditioning event has zero probability).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Any

import numpy as np

from .closed_form import BinaryEvidence, tp_pn_bounds, tp_pns_bounds, tp_ps_bounds
from .docio import (
    load_problem,
    problem_to_dict,
    query_from_dict,
    query_to_dict,
    save_document,
    write_csv,
    write_plot_csv,
    write_summary_csv,
)
from .model import (
    EPS_EVIDENCE,
    KIND_EXPERIMENTAL,
    QUERY_PNS,
    BoundsInterval,
    EvidenceError,
    EvidenceSet,
    QuerySpec,
    ROLE_MEDIATOR,
    SchemaError,
    validate_evidence,
)
from .scmlab import (
    AVAIL_COVARIATE,
    AVAILABILITIES,
    SCM_MEDIATOR,
    SCM_NONDESC,
    SUMMARY_STATS,
    ScmSpec,
    TrialRecord,
    TrialSettings,
    proposed_bounds,
    run_trials,
    sample_scm,
    scm_to_evidence,
    sorted_plot_series,
    summarize,
)
from .solver import InfeasibleProgramError, IntervalResult

EXIT_SCHEMA = 2
EXIT_EVIDENCE = 3
EXIT_INFEASIBLE = 4
EXIT_UNDEFINED = 5

_FAMILY_KINDS = {"nondesc": SCM_NONDESC, "mediator": SCM_MEDIATOR}


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _select_method(evidence: EvidenceSet) -> str:
    if any(v.role == ROLE_MEDIATOR for v in evidence.variables):
        return "mediator-bnb"
    max_cov = max((len(f.covariates) for f in evidence.families), default=0)
    if max_cov >= 2:
        return "covariate-joint-lp"
    if max_cov == 1:
        return "covariate-specific-lp"
    return "balke-lp"


def _closed_form_marginal(
    evidence: EvidenceSet, query: QuerySpec
) -> BoundsInterval | None:
    """Marginal closed-form interval, for the standard binary queries only."""
    exp = next((f for f in evidence.families if f.kind == KIND_EXPERIMENTAL), None)
    joint = evidence.observational_joint_xy()
    if exp is None or joint is None:
        return None
    if exp.table.shape[:2] != (2, 2) or joint.shape != (2, 2):
        return None
    arm = exp.table.reshape(2, 2, -1).sum(axis=2)
    totals = arm.sum(axis=1)
    if not np.all(totals > 0.0):
        return None
    be = BinaryEvidence(
        p_yx=float(arm[0, 0] / totals[0]),
        p_yxp=float(arm[1, 0] / totals[1]),
        p_xy=float(joint[0, 0]),
        p_xyp=float(joint[0, 1]),
        p_xpy=float(joint[1, 0]),
        p_xpyp=float(joint[1, 1]),
        p_y=float(joint[0, 0] + joint[1, 0]),
    )
    if query.kind == QUERY_PNS:
        if query.k != 2 or query.resolved_outcomes(2) != (0, 1):
            return None
        return tp_pns_bounds(be)
    event = query.resolved_event()
    if query.kind == "pn":
        return tp_pn_bounds(be) if event == (0, 0) else None
    return tp_ps_bounds(be) if event == (1, 1) else None


def _interval_dict(interval: BoundsInterval) -> dict[str, Any]:
    return {"lb": interval.lb, "ub": interval.ub, "certified": interval.certified}


def _result_document(
    method: str, query: QuerySpec, outcome: IntervalResult, closed: BoundsInterval | None
) -> dict[str, Any]:
    lo, hi = outcome.lower, outcome.upper
    inner = None
    if lo.inner_value is not None and hi.inner_value is not None:
        inner = {"lb": lo.inner_value, "ub": hi.inner_value}
    doc: dict[str, Any] = {
        "method": method,
        "query": query_to_dict(query),
        "bounds": _interval_dict(outcome.interval),
        "inner_bounds": inner,
        "status": {"lower": lo.status, "upper": hi.status},
        "stats": {
            "nodes_explored": outcome.nodes_explored,
            "lp_solves": lo.lp_solves + hi.lp_solves,
            "lp_pivots": outcome.lp_pivots,
            "max_residual": max(lo.max_residual, hi.max_residual),
            "runtime_ms": outcome.runtime_ms,
        },
    }
    if closed is not None:
        doc["closed_form_marginal"] = _interval_dict(closed)
    return doc


def cmd_bounds(args: argparse.Namespace) -> int:
    try:
        evidence, query, options = load_problem(args.problem)
    except SchemaError as exc:
        return _fail(EXIT_SCHEMA, str(exc))
    except EvidenceError as exc:
        return _fail(EXIT_EVIDENCE, str(exc))
    report = validate_evidence(evidence, eps=args.tol)
    for issue in report.warnings:
        print(f"warning: {issue.message}", file=sys.stderr)
    if report.errors:
        worst = report.errors[0]
        return _fail(
            EXIT_EVIDENCE,
            f"inconsistent evidence in {', '.join(worst.families)}: {worst.message}",
        )

    method = _select_method(evidence)
    budget = int(options.get("budget", args.budget))
    gap_tol = float(options.get("gap_tol", args.gap_tol))
    stall = args.stall_rounds if args.stall_rounds > 0 else None
    try:
        outcome = proposed_bounds(
            evidence,
            query,
            budget=budget,
            gap_tol=gap_tol,
            stall_rounds=stall,
            seed=args.seed,
        )
    except SchemaError as exc:
        return _fail(EXIT_SCHEMA, str(exc))
    except EvidenceError as exc:
        code = EXIT_UNDEFINED if "undefined" in str(exc) else EXIT_EVIDENCE
        return _fail(code, str(exc))
    except InfeasibleProgramError as exc:
        return _fail(EXIT_INFEASIBLE, str(exc))

    closed = _closed_form_marginal(evidence, query)
    doc = _result_document(method, query, outcome, closed)
    out_path = args.out or Path(args.problem).with_suffix(".result.json")
    save_document(out_path, doc)

    iv = outcome.interval
    print(f"method: {method}")
    print(f"certified {query.kind} bounds: [{iv.lb!r}, {iv.ub!r}]")
    if doc["inner_bounds"] is not None:
        inner = doc["inner_bounds"]
        print(f"heuristic inner interval: [{inner['lb']!r}, {inner['ub']!r}]")
    if closed is not None:
        print(f"marginal closed form for comparison: [{closed.lb!r}, {closed.ub!r}]")
    print(f"result written to: {out_path}")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        spec = ScmSpec(
            kind=_FAMILY_KINDS[args.family],
            n_covariates=args.m,
            availability=args.availability,
        )
        query = query_from_dict({"kind": args.query})
        settings = TrialSettings(
            scm=spec,
            query=query,
            n_trials=args.trials,
            seed=args.seed,
            budget=args.budget,
            gap_tol=args.gap_tol,
            stall_rounds=args.stall_rounds if args.stall_rounds > 0 else None,
        )
    except (SchemaError, ValueError) as exc:
        return _fail(EXIT_SCHEMA, str(exc))
    if args.trials < 1:
        return _fail(EXIT_SCHEMA, "--trials must be positive")
    if args.sample is not None and not 1 <= args.sample <= args.trials:
        return _fail(EXIT_SCHEMA, "--sample must be between 1 and --trials")

    records = run_trials(settings, jobs=args.jobs)
    stats = summarize(records)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(
        out_dir / "trials.csv",
        list(TrialRecord.COLUMNS),
        [r.row() for r in records],
    )
    write_summary_csv(out_dir / "summary.csv", SUMMARY_STATS, stats)
    for side in ("lb", "ub"):
        series = sorted_plot_series(records, side, sample=args.sample, seed=args.seed)
        write_plot_csv(out_dir / f"plot_{side}.csv", series)
        if not args.no_figures:
            from .plots import render_bound_curves

            render_bound_curves(series, side, out_dir / f"plot_{side}.png")

    for name in SUMMARY_STATS:
        print(f"{name}: {stats[name]!r}")
    print(f"outputs written to: {out_dir}")
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    try:
        spec = ScmSpec(
            kind=_FAMILY_KINDS[args.family],
            n_covariates=args.m,
            availability=args.availability,
        )
        query = query_from_dict({"kind": args.query})
    except (SchemaError, ValueError) as exc:
        return _fail(EXIT_SCHEMA, str(exc))
    # Matches trial 0 of a sweep with the same seed, on purpose.
    rng = np.random.default_rng(np.random.SeedSequence((args.seed, 0)))
    truth = sample_scm(spec, rng)
    if query.kind != QUERY_PNS and truth.event_mass(query) <= 0.0:
        x_val, y_val = query.resolved_event()
        return _fail(
            EXIT_UNDEFINED,
            f"{query.kind} undefined for this model: P(X={x_val}, Y={y_val}) = 0",
        )
    value = truth.query_value(query)
    print(f"true {query.kind}: {value!r}")
    if args.emit_evidence is not None:
        evidence = scm_to_evidence(truth)
        doc = problem_to_dict(evidence, query, options={"true_value": value})
        save_document(args.emit_evidence, doc)
        print(f"problem document written to: {args.emit_evidence}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pocbounds",
        description="Certified bounds on probabilities of causation "
        "from experimental and observational evidence.",
    )
    parser.add_argument("--seed", type=int, default=0, help="root seed for all randomness")
    parser.add_argument("--jobs", type=int, default=1, help="parallel trial workers")
    parser.add_argument(
        "--tol", type=float, default=EPS_EVIDENCE,
        help="evidence consistency tolerance (default %(default)g)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="solve one problem document")
    b.add_argument("problem", type=Path, help="path to a problem document (JSON)")
    b.add_argument("-o", "--out", type=Path, default=None, help="result document path")
    b.add_argument("--budget", type=int, default=2000, help="branch-and-bound node budget")
    b.add_argument("--gap-tol", type=float, default=1e-3, help="certified-vs-inner stop gap")
    b.add_argument(
        "--stall-rounds", type=int, default=20,
        help="stop after this many non-improving expansions (0 disables)",
    )
    b.set_defaults(func=cmd_bounds)

    s = sub.add_parser("simulate", help="run a simulation sweep and write its outputs")
    s.add_argument("--family", choices=sorted(_FAMILY_KINDS), required=True)
    s.add_argument("--m", type=int, default=1, help="number of covariates")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--availability", choices=AVAILABILITIES, default=AVAIL_COVARIATE)
    s.add_argument("--query", choices=("pns", "pn", "ps"), default="pns")
    s.add_argument("--out-dir", type=Path, required=True)
    s.add_argument("--budget", type=int, default=2000)
    s.add_argument("--gap-tol", type=float, default=1e-3)
    s.add_argument("--stall-rounds", type=int, default=20)
    s.add_argument("--sample", type=int, default=None, help="plot subsample size")
    s.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    s.set_defaults(func=cmd_simulate)

    o = sub.add_parser("oracle", help="sample a ground-truth model and print the true value")
    o.add_argument("--family", choices=sorted(_FAMILY_KINDS), required=True)
    o.add_argument("--m", type=int, default=1, help="number of covariates")
    o.add_argument("--availability", choices=AVAILABILITIES, default=AVAIL_COVARIATE)
    o.add_argument("--query", choices=("pns", "pn", "ps"), default="pns")
    o.add_argument(
        "--emit-evidence", type=Path, default=None,
        help="also write the implied problem document here",
    )
    o.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
