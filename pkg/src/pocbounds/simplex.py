"""Dense two-phase simplex with Bland fallback and dual certificates.

The linear programs solved in this package are small (tens to a few hundred
rows) but heavily degenerate: constraint matrices are mostly 0/1 indicator
rows over a probability simplex, and many right-hand sides coincide.  A
dense tableau implementation with vectorized pivots is both fast enough and
fully deterministic, which the reproducibility contract of the simulation
lab requires.  Pricing starts with Dantzig's rule (ties broken by lowest
column index) and switches to Bland's rule after a fixed number of pivots so
cycling cannot occur.  Accumulated pivot error is kept out of results by
refactorizing the tableau from the original columns at intervals and before
any terminal claim.

Unboundedness cannot happen for the programs built here (every variable is
trapped under a simplex constraint), so it is reported as an internal error
rather than a status.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

REL_EQ = "="
REL_LE = "<="
REL_GE = ">="

_TOL_PIVOT = 1e-9
_TOL_COST = 1e-9
_TOL_FEAS = 1e-7
_MAX_PIVOTS = 200_000
_FEAS_SLACK = 1e-9  # Harris ratio-test slack: trade a hair of feasibility for pivot size
_REFACTOR_EVERY = 128
_SCAN_COLUMNS = 40  # entering candidates examined before settling for a tiny pivot
_GOOD_PIVOT = 1e-5


class SimplexInternalError(RuntimeError):
    """Raised for conditions that indicate a bug, not a bad input."""


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible"
    objective: float
    x: np.ndarray | None
    duals: np.ndarray | None  # one multiplier per input row, original orientation
    pivots: int
    max_residual: float = 0.0  # worst primal constraint violation at x
    dual_gap: float = 0.0  # |objective - y.b| when duals are computed
    min_reduced_cost: float = 0.0  # most negative reduced cost (>= -tol at optimum)
    violated_rows: list[int] = field(default_factory=list)  # populated when infeasible


def _pivot(T: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    column = T[:, col].copy()
    column[row] = 0.0
    # Basic columns are exact unit vectors between refactorizations (they are
    # zeroed below and by _rebuild), so the pivot row vanishes there and the
    # rank-one update only has to touch the pivot row's nonzero columns.
    live = np.flatnonzero(T[row])
    T[:, live] -= np.outer(column, T[row, live])
    # Remove numerical dust so later ratio tests see an exact unit column.
    T[:, col] = 0.0
    T[row, col] = 1.0
    basis[row] = col


def _rebuild(
    T: np.ndarray,
    basis: np.ndarray,
    E_full: np.ndarray,
    b_work: np.ndarray,
    c_phase: np.ndarray,
) -> bool:
    """Recompute the whole tableau from original columns for the given basis.

    Returns False when the basis matrix is too ill-conditioned to trust the
    rebuild; raises when an exact rebuild shows the basis has genuinely lost
    primal feasibility.
    """
    m = T.shape[0] - 1
    B = E_full[:, basis]
    try:
        binv = np.linalg.inv(B)
    except np.linalg.LinAlgError:
        return False
    if not np.isfinite(binv).all():
        return False
    xb = binv @ b_work
    if np.abs(B @ xb - b_work).max() > 1e-7:
        return False
    if xb.min() < -1e-6:
        raise SimplexInternalError("basis lost primal feasibility")
    np.maximum(xb, 0.0, out=xb)
    cb = c_phase[basis]
    T[:m, :-1] = binv @ E_full
    T[:m, -1] = xb
    T[-1, :-1] = c_phase - (cb @ binv) @ E_full
    T[-1, -1] = -float(cb @ xb)
    T[:m, basis] = 0.0
    T[np.arange(m), basis] = 1.0
    T[-1, basis] = 0.0
    return True


def _iterate(
    T: np.ndarray,
    basis: np.ndarray,
    allowed: np.ndarray,
    pivots_done: int,
    bland_after: int,
    E_full: np.ndarray,
    b_work: np.ndarray,
    c_phase: np.ndarray,
    max_pivots: int = _MAX_PIVOTS,
    refactor_every: int = _REFACTOR_EVERY,
    feas_slack: float = _FEAS_SLACK,
) -> tuple[str, int]:
    """Run simplex iterations until optimal or unbounded; returns new pivot count.

    Rank-one pivot updates drift, and everything downstream (ratio tests,
    optimality tests, certified bound values) trusts the tableau.  The
    tableau is therefore refactorized, i.e. recomputed from the original
    columns for the current basis, at intervals, when a chosen pivot element
    looks like accumulated dust, and after any blowup.  A terminal "optimal"
    is only returned once exact pricing for the current basis confirms it;
    the confirmation solves two triangular systems instead of rebuilding the
    tableau body, so on return the rhs column, objective cell, and cost row
    are exact while the body may be stale.
    """
    m = T.shape[0] - 1
    pivots = pivots_done
    since_refactor = 1  # inherited tableaus count as unverified

    def refactor() -> bool:
        nonlocal since_refactor
        if _rebuild(T, basis, E_full, b_work, c_phase):
            since_refactor = 0
            return True
        return False

    def verify_terminal() -> int:
        """Exact optimality check for the current basis, no body rebuild.

        1: optimal confirmed; rhs, objective, and cost row overwritten with
        exact values.  0: exact pricing still finds an entering candidate.
        -1: basis too ill-conditioned to decide either way.
        """
        B = E_full[:, basis]
        cb = c_phase[basis]
        try:
            xb = np.linalg.solve(B, b_work)
            y = np.linalg.solve(B.T, cb)
        except np.linalg.LinAlgError:
            return -1
        if not (np.isfinite(xb).all() and np.isfinite(y).all()):
            return -1
        if np.abs(B @ xb - b_work).max() > 1e-7:
            return -1
        if xb.min() < -1e-6:
            raise SimplexInternalError("basis lost primal feasibility")
        np.maximum(xb, 0.0, out=xb)
        exact_cost = c_phase - y @ E_full
        exact_cost[basis] = 0.0
        if (allowed & (exact_cost < -_TOL_COST)).any():
            return 0
        T[:m, -1] = xb
        T[-1, :-1] = exact_cost
        T[-1, -1] = -float(cb @ xb)
        return 1

    while True:
        if pivots > max_pivots:
            raise SimplexInternalError("pivot limit exceeded")
        if since_refactor >= refactor_every:
            refactor()
        cost = T[-1, :-1]
        candidates = allowed & (cost < -_TOL_COST)
        if not candidates.any():
            if not since_refactor:
                return "optimal", pivots
            if verify_terminal() == 1:
                return "optimal", pivots
            if refactor():
                continue  # exact pricing disagreed; iterate on exact data
            return "optimal", pivots
        rhs = np.maximum(T[:m, -1], 0.0)
        if pivots < bland_after:
            # Scan candidate columns in cost order until one admits a pivot
            # element of healthy size; dividing by a near-zero element is how
            # tableaus blow up.  The Harris-style ratio test trades a hair of
            # feasibility slack for a wider, larger-element leaving choice.
            masked = np.where(candidates, cost, np.inf)
            order = np.argsort(masked, kind="stable")[:_SCAN_COLUMNS]
            col = row = -1
            alt_el = 0.0
            retry = False
            for cand in order:
                if not candidates[cand]:
                    break
                column = T[:m, cand]
                positive = column > _TOL_PIVOT
                if not positive.any():
                    if since_refactor and refactor():
                        retry = True
                        break
                    return "unbounded", pivots
                limits = np.full(m, np.inf)
                limits[positive] = (rhs[positive] + feas_slack) / column[positive]
                theta = limits.min()
                eligible = np.flatnonzero(limits <= theta + 1e-12 * (1.0 + theta))
                piv_vals = column[eligible]
                strong = eligible[piv_vals >= 0.5 * piv_vals.max()]
                r = int(strong[np.argmin(basis[strong])])
                if column[r] >= _GOOD_PIVOT:
                    col, row = int(cand), r
                    break
                if column[r] > alt_el:  # remember the least-bad fallback
                    alt_el, col, row = float(column[r]), int(cand), r
            if retry:
                continue
        else:  # Bland: lowest eligible index, immune to cycling
            col = int(np.flatnonzero(candidates)[0])
            column = T[:m, col]
            positive = column > _TOL_PIVOT
            if not positive.any():
                if since_refactor and refactor():
                    continue
                return "unbounded", pivots
            # Textbook min ratio, lowest basic index: Bland's guarantee.
            ratios = np.full(m, np.inf)
            ratios[positive] = rhs[positive] / column[positive]
            tied = np.flatnonzero(ratios <= ratios.min() + 1e-15)
            row = int(tied[np.argmin(basis[tied])])
        if abs(T[row, col]) < 1e-7 and since_refactor and refactor():
            continue  # tiny pivot was possibly dust; re-price on exact data
        _pivot(T, basis, row, col)
        pivots += 1
        since_refactor += 1
        bad = np.abs(T[:, -1]).max() > 1e9 or not np.isfinite(T[:, -1]).all()
        if bad and not refactor():
            raise SimplexInternalError("tableau diverged")


def _presolve_zero_columns(
    A: np.ndarray, rels: list[str], b: np.ndarray
) -> tuple[np.ndarray, np.ndarray, int] | None:
    """Detect variables forced to zero by sign-definite rows with zero rhs.

    Equality rows with rhs 0 whose surviving coefficients share one sign pin
    every touched variable at zero (likewise "<=" with nonnegative and ">="
    with nonpositive coefficients).  Such rows come from zero-probability
    evidence cells, mediator consistency, and collapsed aggregate boxes; left
    in place they breed degenerate pivoting.  Returns (keep_cols, keep_rows,
    violated_row) where violated_row >= 0 flags a row unsatisfiable at the
    forced zeros, or None when nothing is forced.
    """
    m, n = A.shape
    is_eq = np.array([r == REL_EQ for r in rels])
    is_le = np.array([r == REL_LE for r in rels])
    is_ge = ~is_eq & ~is_le
    zero_rhs = np.abs(b) <= 1e-12
    forced = np.zeros(n, dtype=bool)
    while True:
        alive_mask = ~forced
        nonneg = ((A >= 0.0) | ~alive_mask[None, :]).all(axis=1)
        nonpos = ((A <= 0.0) | ~alive_mask[None, :]).all(axis=1)
        forcing = zero_rhs & (
            (is_eq & (nonneg | nonpos)) | (is_le & nonneg) | (is_ge & nonpos)
        )
        newly = (A[forcing] != 0.0).any(axis=0) & alive_mask
        if not newly.any():
            break
        forced |= newly
    if not forced.any():
        return None
    keep_cols = np.flatnonzero(~forced)
    empty = (A[:, keep_cols] != 0.0).sum(axis=1) == 0
    satisfied = (
        (is_eq & (np.abs(b) <= 1e-9)) | (is_le & (b >= -1e-9)) | (is_ge & (b <= 1e-9))
    )
    bad = np.flatnonzero(empty & ~satisfied)
    if bad.size:
        return keep_cols, np.flatnonzero(~empty), int(bad[0])
    return keep_cols, np.flatnonzero(~empty), -1


def solve_dense_lp(
    c: np.ndarray,
    A: np.ndarray,
    rels: list[str],
    b: np.ndarray,
    maximize: bool = False,
    compute_duals: bool = True,
    fail_fast: bool = False,
) -> LpResult:
    """Solve min (or max) c.x subject to A x (rel) b, x >= 0.

    ``rels`` holds one of "=", "<=", ">=" per row.  Returns primal solution,
    simplex multipliers per original row, and certificate diagnostics.  For
    infeasible systems, ``violated_rows`` lists input rows whose phase-1
    artificial variable stayed positive (a conflict witness, not necessarily
    minimal).

    A pass that fails internally (lost feasibility, diverged tableau) or
    returns a solution whose recomputed residual stays above tolerance
    triggers a re-solve along a genuinely different pivot path: first the
    unreduced system under the default pricing, then Bland's rule, then as a
    last resort the tableau refactorized after every single pivot, which
    trades a factor of the basis size in runtime for exact pricing at each
    step.  Persistent failure raises rather than returning a wrong
    certificate.  Callers that can absorb a failure cheaply (a
    branch-and-bound child keeps its parent's bound) set ``fail_fast`` to
    skip the expensive rescue passes and keep only the cheap ones.

    When duals are not requested, variables provably zero in every feasible
    point are presolved away first (see _presolve_zero_columns); certificate
    solves skip that reduction so multipliers cover every input row.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    reduction = None
    if not compute_duals:
        pre = _presolve_zero_columns(A, rels, b)
        if pre is not None:
            keep_cols, keep_rows, bad_row = pre
            if bad_row >= 0:
                return LpResult(
                    status="infeasible",
                    objective=float("nan"),
                    x=None,
                    duals=None,
                    pivots=0,
                    violated_rows=[bad_row],
                )
            reduction = (keep_cols, keep_rows)

    # Attempt ladder.  The reduced and unreduced systems pivot along
    # different paths, so each serves as a cheap rescue for the other.
    attempts: list[tuple[bool, dict]] = []
    if reduction is not None:
        attempts.append((True, {"force_bland": False}))
    attempts.append((False, {"force_bland": False}))
    if not fail_fast:
        attempts.append((False, {"force_bland": True}))
        attempts.append((False, {"force_bland": False, "paranoid": True}))

    for i, (use_reduction, kwargs) in enumerate(attempts):
        last = i == len(attempts) - 1
        try:
            if use_reduction:
                keep_cols, keep_rows = reduction
                sub = _solve_once(
                    c[keep_cols],
                    A[np.ix_(keep_rows, keep_cols)],
                    [rels[j] for j in keep_rows],
                    b[keep_rows],
                    maximize,
                    compute_duals,
                    **kwargs,
                )
            else:
                sub = _solve_once(c, A, rels, b, maximize, compute_duals, **kwargs)
        except SimplexInternalError:
            if last:
                raise
            continue
        if sub.status == "optimal" and sub.max_residual > 1e-6:
            if last:
                raise SimplexInternalError(
                    f"simplex lost feasibility (residual {sub.max_residual:.3e})"
                )
            continue
        if not use_reduction:
            return sub
        keep_cols, keep_rows = reduction
        x = None
        if sub.x is not None:
            x = np.zeros(A.shape[1])
            x[keep_cols] = sub.x
        return LpResult(
            status=sub.status,
            objective=sub.objective,
            x=x,
            duals=None,
            pivots=sub.pivots,
            max_residual=sub.max_residual,
            min_reduced_cost=sub.min_reduced_cost,
            violated_rows=[int(keep_rows[j]) for j in sub.violated_rows],
        )
    raise SimplexInternalError("unreachable: attempt ladder fell through")


def solve_dense_lp_series(
    objectives: list[tuple[np.ndarray, bool]],
    A: np.ndarray,
    rels: list[str],
    b: np.ndarray,
) -> list[LpResult | None]:
    """Solve many objectives over one constraint system, sharing the basis.

    Feasibility of ``A x (rel) b, x >= 0`` does not depend on the objective,
    so phase 1 runs once and each (c, maximize) entry warm-starts from the
    previous optimal basis; consecutive objectives that differ little (the
    box-tightening sweep optimizes closely related aggregate sums) then cost
    a handful of pivots instead of a full cold solve.  Returns one result
    per objective, or None where that solve failed numerically; if the
    system is infeasible every entry is an infeasible result.  No duals.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    keep_cols = np.arange(A.shape[1])
    pre = _presolve_zero_columns(A, rels, b)
    if pre is not None:
        keep_cols, keep_rows, bad_row = pre
        if bad_row >= 0:
            bad = LpResult(
                status="infeasible", objective=float("nan"), x=None,
                duals=None, pivots=0, violated_rows=[bad_row],
            )
            return [bad for _ in objectives]
        row_map = keep_rows
        A_red = A[np.ix_(keep_rows, keep_cols)]
        rels_red = [rels[i] for i in keep_rows]
        b_red = b[keep_rows]
    else:
        row_map = np.arange(A.shape[0])
        A_red, rels_red, b_red = A, list(rels), b

    m, n = A_red.shape

    # System setup mirrors _solve_once (conversion, scaling, slack basis).
    A_conv = A_red.copy()
    b_conv = b_red.copy()
    is_ineq = np.zeros(m, dtype=bool)
    for i, rel in enumerate(rels_red):
        if rel == REL_GE:
            A_conv[i] = -A_conv[i]
            b_conv[i] = -b_conv[i]
            is_ineq[i] = True
        elif rel == REL_LE:
            is_ineq[i] = True
        elif rel != REL_EQ:
            raise ValueError(f"unknown relation {rel!r}")
    row_scale = np.abs(A_conv).max(axis=1)
    row_scale[row_scale <= 0.0] = 1.0
    A_conv /= row_scale[:, None]
    b_conv = b_conv / row_scale

    n_slack = int(is_ineq.sum())
    E = np.zeros((m, n + n_slack))
    E[:, :n] = A_conv
    slack_of_row = np.full(m, -1)
    col = n
    for i in range(m):
        if is_ineq[i]:
            E[i, col] = 1.0
            slack_of_row[i] = col
            col += 1
    negated = b_conv < 0
    E[negated] *= -1.0
    b_work = b_conv.copy()
    b_work[negated] *= -1.0

    needs_artificial = [
        i for i in range(m) if slack_of_row[i] < 0 or negated[i]
    ]
    n_art = len(needs_artificial)
    ntot = n + n_slack + n_art
    artificial = np.zeros(ntot, dtype=bool)
    artificial[n + n_slack :] = True
    allowed = ~artificial
    E_full = np.zeros((m, ntot))
    E_full[:, : n + n_slack] = E
    for k, i in enumerate(needs_artificial):
        E_full[i, n + n_slack + k] = 1.0

    T = np.zeros((m + 1, ntot + 1))
    basis = np.full(m, -1)
    state = {"pivots": 0}

    def reset() -> bool:
        """Fresh tableau + phase 1; True when the system proved feasible."""
        T[:m, :ntot] = E_full
        T[:m, -1] = b_work
        for i in range(m):
            s = slack_of_row[i]
            basis[i] = s if (s >= 0 and not negated[i]) else -1
        for k, i in enumerate(needs_artificial):
            basis[i] = n + n_slack + k
        if n_art:
            c_phase1 = np.zeros(ntot)
            c_phase1[n + n_slack :] = 1.0
            T[-1, :] = 0.0
            T[-1, n + n_slack : ntot] = 1.0
            for i in needs_artificial:
                T[-1] -= T[i]
            status, state["pivots"] = _iterate(
                T, basis, allowed, state["pivots"],
                bland_after=_bland_after(m, ntot),
                E_full=E_full, b_work=b_work, c_phase=c_phase1,
            )
            if status == "unbounded":
                raise SimplexInternalError("phase-1 objective unbounded")
            if -T[-1, -1] > _TOL_FEAS:
                return False
            # Drive zero-level artificials out where the row offers a usable
            # pivot; a basic artificial left in a live row could creep back
            # above zero during a later objective's pivots.  Rows without a
            # usable element are redundant and stay pinned at zero.
            for i in range(m):
                if artificial[basis[i]]:
                    T[i, -1] = 0.0
                    row = T[i, : n + n_slack]
                    best_col = int(np.abs(row).argmax())
                    if abs(row[best_col]) > 1e-5:
                        _pivot(T, basis, i, best_col)
                        state["pivots"] += 1
        return True

    def residual_of(x_vec: np.ndarray) -> float:
        lhs = A_red @ x_vec
        worst = 0.0
        for i, rel in enumerate(rels_red):
            if rel == REL_EQ:
                worst = max(worst, abs(lhs[i] - b_red[i]))
            elif rel == REL_LE:
                worst = max(worst, lhs[i] - b_red[i])
            else:
                worst = max(worst, b_red[i] - lhs[i])
        return max(worst, float(-(x_vec.min(initial=0.0))))

    try:
        feasible = reset()
    except SimplexInternalError:
        return [None for _ in objectives]
    if not feasible:
        violated = [
            int(row_map[i])
            for i in range(m)
            if artificial[basis[i]] and T[i, -1] > _TOL_FEAS
        ]
        bad = LpResult(
            status="infeasible", objective=float("nan"), x=None,
            duals=None, pivots=state["pivots"], violated_rows=violated,
        )
        return [bad for _ in objectives]

    results: list[LpResult | None] = []
    healthy = True
    for c_obj, maximize in objectives:
        c_obj = np.asarray(c_obj, dtype=float)
        c_red = c_obj[keep_cols]
        c_ext = np.zeros(ntot)
        c_ext[:n] = -c_red if maximize else c_red
        ok = healthy
        if ok:
            try:
                # Reprice the tableau for this objective at the carried-over
                # (still feasible) basis, then iterate to its optimum.
                if not _rebuild(T, basis, E_full, b_work, c_ext):
                    ok = False
                else:
                    status, state["pivots"] = _iterate(
                        T, basis, allowed, state["pivots"],
                        bland_after=_bland_after(m, ntot),
                        E_full=E_full, b_work=b_work, c_phase=c_ext,
                    )
                    ok = status == "optimal"
            except SimplexInternalError:
                ok = False
                healthy = False
        if not ok:
            results.append(None)
            if not healthy:
                # The basis was damaged; restart cleanly for the rest.
                try:
                    healthy = reset()
                except SimplexInternalError:
                    healthy = False
                if not healthy:
                    results.extend(None for _ in range(len(objectives) - len(results)))
                    break
            continue
        x_red = np.zeros(ntot)
        x_red[basis] = T[:m, -1]
        x_red = x_red[:n]
        residual = residual_of(x_red)
        if residual > _TOL_FEAS:
            results.append(None)
            continue
        x = np.zeros(A.shape[1])
        x[keep_cols] = x_red
        results.append(
            LpResult(
                status="optimal",
                objective=float(c_red @ x_red),
                x=x,
                duals=None,
                pivots=state["pivots"],
                max_residual=float(residual),
            )
        )
    return results


def _solve_once(
    c: np.ndarray,
    A: np.ndarray,
    rels: list[str],
    b: np.ndarray,
    maximize: bool,
    compute_duals: bool,
    force_bland: bool,
    paranoid: bool = False,
) -> LpResult:
    refactor_every = 1 if paranoid else _REFACTOR_EVERY
    # With exact (freshly refactored) data every pivot, the Harris slack is
    # pure downside: each step would debit true feasibility by up to the
    # slack, and the debts add up across a long degenerate run.
    feas_slack = 0.0 if paranoid else _FEAS_SLACK
    if paranoid:
        pivot_cap = 10_000  # every pivot pays a refactorization here
    elif force_bland:
        pivot_cap = 30_000
    else:
        pivot_cap = _MAX_PIVOTS
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if c.shape != (n,) or b.shape != (m,) or len(rels) != m:
        raise ValueError("inconsistent LP dimensions")
    obj_sign = -1.0 if maximize else 1.0
    c_solve = obj_sign * c

    # Orient every row as "=" or "<=", tracking dual sign flips.
    A_conv = A.copy()
    b_conv = b.copy()
    dual_sign = np.ones(m)
    is_ineq = np.zeros(m, dtype=bool)
    for i, rel in enumerate(rels):
        if rel == REL_GE:
            A_conv[i] = -A_conv[i]
            b_conv[i] = -b_conv[i]
            dual_sign[i] = -1.0
            is_ineq[i] = True
        elif rel == REL_LE:
            is_ineq[i] = True
        elif rel != REL_EQ:
            raise ValueError(f"unknown relation {rel!r}")

    # Row equilibration: badly scaled rows (products of box endpoints) breed
    # tiny pivots and tableau blowup.  Duals are rescaled back on exit.
    row_scale = np.abs(A_conv).max(axis=1)
    row_scale[row_scale <= 0.0] = 1.0
    A_conv /= row_scale[:, None]
    b_conv = b_conv / row_scale

    n_slack = int(is_ineq.sum())
    E = np.zeros((m, n + n_slack))
    E[:, :n] = A_conv
    slack_of_row = np.full(m, -1)
    col = n
    for i in range(m):
        if is_ineq[i]:
            E[i, col] = 1.0
            slack_of_row[i] = col
            col += 1

    # Make the rhs nonnegative; negated rows lose their unit slack column.
    negated = b_conv < 0
    E[negated] *= -1.0
    b_work = b_conv.copy()
    b_work[negated] *= -1.0
    dual_sign[negated] *= -1.0

    # Choose the starting basis: a +1 slack where available, else artificial.
    basis = np.full(m, -1)
    needs_artificial = []
    for i in range(m):
        s = slack_of_row[i]
        if s >= 0 and not negated[i]:
            basis[i] = s
        else:
            needs_artificial.append(i)
    n_art = len(needs_artificial)
    ntot = n + n_slack + n_art
    T = np.zeros((m + 1, ntot + 1))
    T[:m, : n + n_slack] = E
    T[:m, -1] = b_work
    for k, i in enumerate(needs_artificial):
        T[i, n + n_slack + k] = 1.0
        basis[i] = n + n_slack + k
    artificial = np.zeros(ntot, dtype=bool)
    artificial[n + n_slack :] = True

    # Exact copy of the converted system; refactorization rebuilds the
    # tableau from these columns so pivot error cannot accumulate.
    E_full = T[:m, :ntot].copy()

    pivots = 0
    allowed = ~artificial

    if n_art:
        # Phase 1: minimize the sum of artificials.
        c_phase1 = np.zeros(ntot)
        c_phase1[n + n_slack :] = 1.0
        T[-1, :] = 0.0
        T[-1, n + n_slack : ntot] = 1.0
        for i in needs_artificial:
            T[-1] -= T[i]
        status, pivots = _iterate(
            T, basis, allowed, pivots,
            bland_after=0 if force_bland else _bland_after(m, ntot),
            E_full=E_full, b_work=b_work, c_phase=c_phase1,
            max_pivots=pivot_cap,
            refactor_every=refactor_every,
            feas_slack=feas_slack,
        )
        if status == "unbounded":
            raise SimplexInternalError("phase-1 objective unbounded")
        if -T[-1, -1] > _TOL_FEAS:
            violated = [
                int(i)
                for i in range(m)
                if artificial[basis[i]] and T[i, -1] > _TOL_FEAS
            ]
            return LpResult(
                status="infeasible",
                objective=float("nan"),
                x=None,
                duals=None,
                pivots=pivots,
                violated_rows=violated,
            )
    # Phase 2 over the original objective; artificials stay barred.
    c_ext = np.zeros(ntot)
    c_ext[:n] = c_solve
    if n_art:
        # One exact rebuild priced with the phase-2 objective clears phase-1
        # drift, produces the reduced cost row, and gives the drive-out
        # pivots below exact rows to work on.  If the basis is too
        # ill-conditioned to rebuild, fall back to the incremental row
        # update; the final residual check still guards the result.
        if not _rebuild(T, basis, E_full, b_work, c_ext):
            T[-1, :] = 0.0
            T[-1, :ntot] = c_ext
            for i in range(m):
                cb = c_ext[basis[i]]
                if cb != 0.0:
                    T[-1] -= cb * T[i]
        # Drive zero-level artificials out of the basis where the row offers
        # a healthy pivot element.  Their levels are at most the phase-1
        # tolerance; truncating to exactly zero first keeps the pivot from
        # spraying that dust, scaled by the reciprocal of the pivot element,
        # across the rhs column.  Rows without a usable element keep their
        # artificial basic at zero level; the ratio test pins such rows there.
        for i in range(m):
            if artificial[basis[i]]:
                T[i, -1] = 0.0
                row = T[i, : n + n_slack]
                best_col = int(np.abs(row).argmax())
                if abs(row[best_col]) > 1e-5:
                    _pivot(T, basis, i, best_col)
                    pivots += 1
    else:
        # Fresh slack basis: every basic cost is zero, so the objective row
        # is already reduced.
        T[-1, :] = 0.0
        T[-1, :ntot] = c_ext
    status, pivots = _iterate(
        T, basis, allowed, pivots,
        bland_after=0 if force_bland else _bland_after(m, ntot),
        E_full=E_full, b_work=b_work, c_phase=c_ext,
        max_pivots=pivot_cap,
        refactor_every=refactor_every,
        feas_slack=feas_slack,
    )
    if status == "unbounded":
        raise SimplexInternalError(
            "LP unbounded: impossible for simplex-constrained programs"
        )

    x_full = np.zeros(ntot)
    x_full[basis] = T[:m, -1]

    def residual_of(x_vec: np.ndarray) -> float:
        lhs = A @ x_vec
        worst = 0.0
        for i, rel in enumerate(rels):
            if rel == REL_EQ:
                worst = max(worst, abs(lhs[i] - b[i]))
            elif rel == REL_LE:
                worst = max(worst, lhs[i] - b[i])
            else:
                worst = max(worst, b[i] - lhs[i])
        return max(worst, float(-(x_vec.min(initial=0.0))))

    x = x_full[:n]
    residual = residual_of(x)
    if residual > _TOL_FEAS:
        # Tableau drift: recompute the basic solution from original columns.
        cols = np.zeros((m, m))
        for i in range(m):
            j = basis[i]
            if j < n + n_slack:
                cols[:, i] = E[:, j]
            else:  # artificial column: unit vector on its row
                cols[needs_artificial[j - n - n_slack], i] = 1.0
        try:
            xb = np.linalg.solve(cols, b_work)
        except np.linalg.LinAlgError:
            xb, *_ = np.linalg.lstsq(cols, b_work, rcond=None)
        refined = np.zeros(ntot)
        refined[basis] = xb
        if residual_of(refined[:n]) < residual:
            x_full = refined
            x = x_full[:n]
            residual = residual_of(x)
    objective = float(c @ x)

    duals = None
    dual_gap = 0.0
    min_rc = 0.0
    if compute_duals:
        B = np.zeros((m, m))
        for i in range(m):
            j = basis[i]
            if j < n + n_slack:
                B[:, i] = E[:, j]
            else:  # artificial basic at zero level: original unit column
                B[needs_artificial[j - n - n_slack], i] = 1.0
        cB = np.array([c_ext[j] for j in basis])
        try:
            y = np.linalg.solve(B.T, cB)
        except np.linalg.LinAlgError:
            y, *_ = np.linalg.lstsq(B.T, cB, rcond=None)
        dual_gap = abs(float(y @ b_work) - obj_sign * objective)
        rc = c_ext[: n + n_slack] - E.T @ y
        min_rc = float(rc.min()) if rc.size else 0.0
        duals = obj_sign * dual_sign * y / row_scale

    return LpResult(
        status="optimal",
        objective=objective,
        x=x,
        duals=duals,
        pivots=pivots,
        max_residual=float(residual),
        dual_gap=float(dual_gap),
        min_reduced_cost=min_rc,
    )


def _bland_after(m: int, ntot: int) -> int:
    # Dantzig pricing is kept long enough for ordinary runs; truly cycling
    # instances fall back to Bland well before the hard pivot limit.
    return 10 * (m + ntot) + 200
