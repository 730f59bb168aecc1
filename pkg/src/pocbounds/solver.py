"""Solvers: exact LP bounds, spatial branch and bound, inner-point search.

Certification contract.  ``solve_lp`` returns exact optima of linear
programs.  ``bb_solve`` returns a bound that is certified *outer*: for the
max sense the returned value is >= the true maximum, for the min sense <=
the true minimum, at every node budget.  Tightness improves monotonically
with budget; exploration is best-first and fully deterministic.  Heuristic
feasible points found along the way give inner (attainable) values and are
reported separately, never as the certified bound.

Termination of branch and bound: gap tolerance against the best inner
point, an explicit node budget, exhaustion of the open set, or a stall
window (no certified-bound improvement over a fixed number of expansions).
The stall condition is an addition to the budget/gap pair; it keeps sweep
runtimes bounded without touching certification, and can be disabled with
``stall_rounds=None``.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

import numpy as np

from .model import EPS_INNER, BoundsInterval
from .programs import BilinearStructure, ConstraintProgram, bilinear_structure
from .simplex import (
    LpResult,
    SimplexInternalError,
    solve_dense_lp,
    solve_dense_lp_series,
)

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_BUDGET = "node_budget_exhausted"
STATUS_TOLERANCE = "tolerance_reached"
STATUS_STALLED = "stalled"
STATUS_FALLBACK = "numerical_fallback"

_BOX_PAD = 1e-7  # safety padding on tightened aggregate boxes
_EXACT_TOL = 1e-8  # bilinear residual below which a node counts as exact
_MIN_WIDTH = 1e-7  # boxes narrower than this are not branched further


@dataclass
class SolveReport:
    """Outcome of one solve (one optimization sense)."""

    status: str
    sense: str  # "min" | "max"
    value: float  # certified bound / exact optimum, after normalization
    bounds: BoundsInterval  # interval guaranteed to contain the true optimum
    nodes_explored: int = 0
    lp_solves: int = 0
    lp_pivots: int = 0
    runtime_ms: float = 0.0
    max_residual: float = 0.0
    dual_gap: float = 0.0
    inner_value: float | None = None  # best feasible-point objective (diagnostic)
    gap: float = float("inf")  # certified-vs-inner gap at termination
    infeasibility_hint: tuple[str, ...] = ()
    certified_history: tuple[float, ...] = ()  # bound before each expansion (unnormalized)


def _assemble(program: ConstraintProgram) -> tuple[np.ndarray, np.ndarray, list[str], np.ndarray]:
    n_cols = program.n_cols
    rows = program.linear
    A = np.zeros((len(rows), n_cols))
    b = np.zeros(len(rows))
    rels: list[str] = []
    for i, row in enumerate(rows):
        np.add.at(A[i], row.indices, row.coeffs)
        b[i] = row.rhs
        rels.append(row.relation)
    c = np.zeros(n_cols)
    c[program.objective] = 1.0
    return c, A, rels, b


def _hint_from_rows(program: ConstraintProgram, row_ids: list[int]) -> tuple[str, ...]:
    seen: list[str] = []
    for i in row_ids:
        label = program.linear[i].label.split("[")[0]
        if label and label not in seen:
            seen.append(label)
    return tuple(seen)


def solve_lp(
    program: ConstraintProgram, sense: str, compute_duals: bool = True
) -> SolveReport:
    """Exact LP optimum of a linear program (bilinear part must be empty).

    Every optimal solve carries a dual certificate: the simplex multipliers
    reproduce the objective within numerical tolerance (reported as
    ``dual_gap``).  Infeasible programs get a conflict hint naming at least
    one violated evidence family.
    """
    if program.bilinear:
        raise ValueError("solve_lp requires a linear program; use bb_solve")
    if sense not in ("min", "max"):
        raise ValueError(f"unknown sense {sense!r}")
    start = time.perf_counter()
    c, A, rels, b = _assemble(program)
    res = solve_dense_lp(c, A, rels, b, maximize=(sense == "max"), compute_duals=compute_duals)
    runtime_ms = (time.perf_counter() - start) * 1e3
    if res.status == "infeasible":
        return SolveReport(
            status=STATUS_INFEASIBLE,
            sense=sense,
            value=float("nan"),
            bounds=BoundsInterval(0.0, 1.0, certified=False),
            lp_solves=1,
            lp_pivots=res.pivots,
            runtime_ms=runtime_ms,
            infeasibility_hint=_hint_from_rows(program, res.violated_rows),
        )
    scale = program.normalizer if program.normalizer is not None else 1.0
    value = res.objective / scale
    return SolveReport(
        status=STATUS_OPTIMAL,
        sense=sense,
        value=value,
        bounds=BoundsInterval(value, value),
        lp_solves=1,
        lp_pivots=res.pivots,
        runtime_ms=runtime_ms,
        max_residual=res.max_residual,
        dual_gap=res.dual_gap,
        inner_value=value,
        gap=0.0,
    )


# ---------------------------------------------------------------------------
# relaxation machinery shared by OBBT and branch and bound
# ---------------------------------------------------------------------------

class _Relaxation:
    """Compressed McCormick relaxation with product classes merged.

    Products tied together by bilinear equalities share one auxiliary column
    (equivalent to per-product auxiliaries plus equality rows, with those
    rows eliminated).  Envelope rows substitute each aggregate's indicator
    expression directly, so the column space is [p, one w per class].
    """

    def __init__(self, program: ConstraintProgram):
        self.program = program
        self.structure: BilinearStructure = bilinear_structure(program)
        n_prod = self.structure.n_products
        # Union-find over products; equalities merge classes.
        parent = list(range(n_prod))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for left, right in self.structure.equalities:
            ri, rj = find(left), find(right)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
        roots: dict[int, int] = {}
        self.class_of_product = []
        for k in range(n_prod):
            r = find(k)
            if r not in roots:
                roots[r] = len(roots)
            self.class_of_product.append(roots[r])
        self.n_classes = len(roots)

        self.n_p = program.space.total_size
        self.n_cols = self.n_p + self.n_classes
        c, A_base, rels_base, b_base = _assemble_padded(program, self.n_cols)
        self.c = c
        self.A_base = A_base
        self.rels_base = rels_base
        self.b_base = b_base

        # Per-product dense aggregate indicator rows for envelope assembly.
        aggs = self.structure.aggregates
        self.agg_rows = np.zeros((len(aggs), self.n_p))
        for i, offsets in enumerate(aggs):
            self.agg_rows[i, offsets] = 1.0

    def node_system(
        self, boxes: np.ndarray, branched: dict[int, tuple[float, float]]
    ) -> tuple[np.ndarray, list[str], np.ndarray]:
        """Assemble the node LP: base rows + envelopes + branched box rows."""
        n_env = 4 * self.structure.n_products
        # 0/1 endpoints are implied by the probability simplex; skip those rows.
        box_rows = [
            (agg_id, lo, hi)
            for agg_id, (lo, hi) in sorted(branched.items())
        ]
        n_box = sum(int(lo > 0.0) + int(hi < 1.0) for _, lo, hi in box_rows)
        A = np.zeros((len(self.b_base) + n_env + n_box, self.n_cols))
        A[: len(self.b_base)] = self.A_base
        b = np.zeros(A.shape[0])
        b[: len(self.b_base)] = self.b_base
        rels = list(self.rels_base)
        r = len(self.b_base)
        for k, (i, j) in enumerate(self.structure.products):
            w_col = self.n_p + self.class_of_product[k]
            lu, uu = boxes[i]
            lv, uv = boxes[j]
            u_row = self.agg_rows[i]
            v_row = self.agg_rows[j]
            # w >= lu*v + lv*u - lu*lv
            A[r, : self.n_p] = lu * v_row + lv * u_row
            A[r, w_col] = -1.0
            b[r] = lu * lv
            # w >= uu*v + uv*u - uu*uv
            A[r + 1, : self.n_p] = uu * v_row + uv * u_row
            A[r + 1, w_col] = -1.0
            b[r + 1] = uu * uv
            # w <= uu*v + lv*u - uu*lv
            A[r + 2, : self.n_p] = -(uu * v_row + lv * u_row)
            A[r + 2, w_col] = 1.0
            b[r + 2] = -uu * lv
            # w <= lu*v + uv*u - lu*uv
            A[r + 3, : self.n_p] = -(lu * v_row + uv * u_row)
            A[r + 3, w_col] = 1.0
            b[r + 3] = -lu * uv
            rels.extend(["<="] * 4)
            r += 4
        for agg_id, lo, hi in box_rows:
            if lo > 0.0:
                A[r, : self.n_p] = self.agg_rows[agg_id]
                b[r] = lo
                rels.append(">=")
                r += 1
            if hi < 1.0:
                A[r, : self.n_p] = self.agg_rows[agg_id]
                b[r] = hi
                rels.append("<=")
                r += 1
        return A, rels, b


def _assemble_padded(
    program: ConstraintProgram, n_cols: int
) -> tuple[np.ndarray, np.ndarray, list[str], np.ndarray]:
    rows = program.linear
    A = np.zeros((len(rows), n_cols))
    b = np.zeros(len(rows))
    rels: list[str] = []
    for i, row in enumerate(rows):
        np.add.at(A[i], row.indices, row.coeffs)
        b[i] = row.rhs
        rels.append(row.relation)
    c = np.zeros(n_cols)
    c[program.objective] = 1.0
    return c, A, rels, b


def tighten_aggregate_boxes(program: ConstraintProgram) -> np.ndarray | None:
    """Bounds on every aggregate implied by the linear rows alone.

    Solves two small LPs per unique aggregate over the linear part of the
    program and pads the result, so the boxes are valid for every point of
    the bilinear feasible set.  Returns None if the linear part is already
    infeasible.
    """
    structure = bilinear_structure(program)
    if not structure.aggregates:
        return np.zeros((0, 2))
    n_p = program.space.total_size
    _, A, rels, b = _assemble_padded(program, n_p)
    objectives = []
    for offsets in structure.aggregates:
        c = np.zeros(n_p)
        c[offsets] = 1.0
        objectives.append((c, False))
        objectives.append((c, True))
    # All the sweeps share one constraint system, so one warm-started series
    # solve replaces a cold two-phase solve per direction per aggregate.
    results = solve_dense_lp_series(objectives, A, rels, b)
    boxes = np.zeros((structure.n_aggregates, 2))
    for i in range(structure.n_aggregates):
        lo, hi = results[2 * i], results[2 * i + 1]
        if lo is not None and lo.status == "infeasible":
            return None
        if lo is None or hi is None:
            boxes[i] = (0.0, 1.0)  # keep the trivial, always valid box
            continue
        lo_v = max(0.0, lo.objective - _BOX_PAD)
        hi_v = min(1.0, hi.objective + _BOX_PAD)
        # Snap near-degenerate endpoints to exact 0/1: enlarging a box keeps
        # it valid and avoids seeding the LP with badly scaled coefficients.
        boxes[i, 0] = 0.0 if lo_v < 1e-6 else lo_v
        boxes[i, 1] = 1.0 if hi_v > 1.0 - 1e-6 else hi_v
    return boxes


def _worst_violation(
    A: np.ndarray, rels: list[str], b: np.ndarray, x: np.ndarray
) -> float:
    """Largest constraint violation of x over the rows (0 means feasible)."""
    resid = A @ x - b
    worst = 0.0
    for i, rel in enumerate(rels):
        r = resid[i]
        if rel == "=":
            worst = max(worst, abs(r))
        elif rel == "<=":
            worst = max(worst, r)
        else:
            worst = max(worst, -r)
    return float(worst)


@dataclass(order=True)
class _Node:
    key: float
    order: int
    bound: float = field(compare=False)
    boxes: np.ndarray = field(compare=False)
    branched: dict = field(compare=False)
    point: np.ndarray = field(compare=False)


def bb_solve(
    program: ConstraintProgram,
    sense: str,
    budget: int = 2000,
    gap_tol: float = 1e-3,
    stall_rounds: int | None = 20,
    stall_tol: float = 1e-6,
    eps_inner: float = EPS_INNER,
    inner_restarts: int = 2,
    seed: int = 0,
    boxes: np.ndarray | None = None,
    obbt: bool = True,
    inner_starts: tuple[np.ndarray, ...] = (),
) -> SolveReport:
    """Certified outer bound on a bilinear program via spatial branch and bound.

    Branching always splits the aggregate interval with the largest envelope
    violation at the relaxation optimum (ties by lowest aggregate id, then
    the wider of the product's two boxes) at its midpoint.  The certified
    bound is the worst relaxation bound over all leaves, which can only
    tighten as the budget grows; reported inner values come from feasible
    points and are diagnostics only.
    """
    if sense not in ("min", "max"):
        raise ValueError(f"unknown sense {sense!r}")
    if not program.bilinear:
        return solve_lp(program, sense)
    start = time.perf_counter()
    relax = _Relaxation(program)
    n_agg = relax.structure.n_aggregates
    scale = program.normalizer if program.normalizer is not None else 1.0
    maximize = sense == "max"
    sign = 1.0 if maximize else -1.0  # work with "larger key = explore first"

    lp_solves = 0
    lp_pivots = 0

    if boxes is None:
        if obbt:
            boxes = tighten_aggregate_boxes(program)
            lp_solves += 2 * n_agg
            if boxes is None:
                return SolveReport(
                    status=STATUS_INFEASIBLE,
                    sense=sense,
                    value=float("nan"),
                    bounds=BoundsInterval(0.0, 1.0, certified=False),
                    lp_solves=lp_solves,
                    runtime_ms=(time.perf_counter() - start) * 1e3,
                )
        else:
            boxes = np.tile(np.array([0.0, 1.0]), (n_agg, 1))
    boxes = np.asarray(boxes, dtype=float)

    inner_best: float | None = None
    inner_point: np.ndarray | None = None

    def consider_inner(p: np.ndarray, objective: float) -> None:
        nonlocal inner_best, inner_point
        if program.max_violation(p) <= eps_inner:
            if inner_best is None or sign * objective > sign * inner_best:
                inner_best = objective
                inner_point = p

    def solve_node(node_boxes: np.ndarray, branched: dict) -> LpResult:
        nonlocal lp_solves, lp_pivots
        A, rels, b = relax.node_system(node_boxes, branched)
        res = solve_dense_lp(relax.c, A, rels, b, maximize=maximize, compute_duals=False)
        lp_solves += 1
        lp_pivots += res.pivots
        return res

    def finish(status: str, certified: float, nodes: int, residual: float) -> SolveReport:
        value = certified / scale
        inner = None if inner_best is None else inner_best / scale
        if maximize:
            lo = 0.0 if inner is None else min(inner, value)
            interval = BoundsInterval(lo, max(value, lo))
        else:
            hi = 1.0 if inner is None else max(inner, value)
            interval = BoundsInterval(min(value, hi), hi)
        gap = float("inf") if inner is None else abs(value - inner)
        return SolveReport(
            status=status,
            sense=sense,
            value=value,
            bounds=interval,
            nodes_explored=nodes,
            lp_solves=lp_solves,
            lp_pivots=lp_pivots,
            runtime_ms=(time.perf_counter() - start) * 1e3,
            max_residual=residual,
            inner_value=inner,
            gap=gap,
            certified_history=tuple(history),
        )

    try:
        root = solve_node(boxes, {})
    except SimplexInternalError:
        # Every rescue pass failed on the root relaxation.  The objective is
        # the mass of a subevent of the normalizing event, so the trivial
        # end of [0, 1] is still a valid certified bound; report it rather
        # than aborting the sweep.
        return SolveReport(
            status=STATUS_FALLBACK,
            sense=sense,
            value=1.0 if maximize else 0.0,
            bounds=BoundsInterval(0.0, 1.0),
            nodes_explored=0,
            lp_solves=lp_solves,
            runtime_ms=(time.perf_counter() - start) * 1e3,
        )
    nodes = 1
    if root.status == "infeasible":
        return SolveReport(
            status=STATUS_INFEASIBLE,
            sense=sense,
            value=float("nan"),
            bounds=BoundsInterval(0.0, 1.0, certified=False),
            nodes_explored=nodes,
            lp_solves=lp_solves,
            lp_pivots=lp_pivots,
            runtime_ms=(time.perf_counter() - start) * 1e3,
            infeasibility_hint=_hint_from_rows(program, root.violated_rows),
        )
    consider_inner(root.x[: relax.n_p], root.objective)
    obj_row = relax.c[: relax.n_p]
    for p0 in inner_starts:  # caller-supplied candidates, often exactly feasible
        p0 = np.asarray(p0, dtype=float)
        consider_inner(p0, float(obj_row @ p0))

    if inner_restarts > 0:
        inner = local_search_inner(
            program,
            sense,
            restarts=inner_restarts,
            seed=seed,
            starts=(root.x[: relax.n_p], *inner_starts),
        )
        if inner.feasible:
            consider_inner(inner.point, inner.objective)

    counter = 0
    heap: list[_Node] = []
    closed_best: float | None = None  # exact leaves (relaxation point feasible)
    resting_best: float | None = None  # leaves kept un-expanded (pruned or too narrow)

    def push(bound: float, node_boxes: np.ndarray, branched: dict, point: np.ndarray) -> None:
        nonlocal counter
        counter += 1
        heapq.heappush(heap, _Node(-sign * bound, counter, bound, node_boxes, branched, point))

    push(root.objective, boxes, {}, root.x)

    def certified_now() -> float:
        best = -sign * np.inf
        if heap:
            best = heap[0].bound
        for v in (closed_best, resting_best):
            if v is not None and sign * v > sign * best:
                best = v
        return best

    history: list[float] = []
    residual = root.max_residual
    while True:
        certified = certified_now()
        history.append(certified)
        inner_val = None if inner_best is None else inner_best
        if inner_val is not None and abs(certified - inner_val) <= gap_tol * scale:
            return finish(STATUS_TOLERANCE, certified, nodes, residual)
        if not heap:
            if closed_best is None and resting_best is None:
                # Every branch region proved empty: the bilinear constraints
                # exclude all points the linear rows admit.
                return SolveReport(
                    status=STATUS_INFEASIBLE,
                    sense=sense,
                    value=float("nan"),
                    bounds=BoundsInterval(0.0, 1.0, certified=False),
                    nodes_explored=nodes,
                    lp_solves=lp_solves,
                    lp_pivots=lp_pivots,
                    runtime_ms=(time.perf_counter() - start) * 1e3,
                )
            return finish(STATUS_OPTIMAL, certified, nodes, residual)
        if nodes + 2 > budget:
            return finish(STATUS_BUDGET, certified, nodes, residual)
        if (
            stall_rounds is not None
            and len(history) > stall_rounds
            and abs(history[-1] - history[-1 - stall_rounds]) < stall_tol
        ):
            return finish(STATUS_STALLED, certified, nodes, residual)

        node = heapq.heappop(heap)
        # Prune: this leaf cannot beat the best attained point; its bound is
        # dominated by regions still open, so resting it keeps certification.
        if inner_best is not None and sign * node.bound <= sign * inner_best + 1e-12:
            if resting_best is None or sign * node.bound > sign * resting_best:
                resting_best = node.bound
            continue

        p_part = node.point[: relax.n_p]
        agg_vals = relax.agg_rows @ p_part
        w_vals = node.point[relax.n_p :]
        best_violation = -1.0
        best_product = -1
        for k, (i, j) in enumerate(relax.structure.products):
            v = abs(w_vals[relax.class_of_product[k]] - agg_vals[i] * agg_vals[j])
            if v > best_violation + 1e-15:
                best_violation = v
                best_product = k
        if best_violation <= _EXACT_TOL:
            # The relaxation optimum already satisfies every product: exact leaf.
            if closed_best is None or sign * node.bound > sign * closed_best:
                closed_best = node.bound
            consider_inner(p_part, float(relax.c[: relax.n_p] @ p_part))
            continue
        i, j = relax.structure.products[best_product]
        widths = (node.boxes[i, 1] - node.boxes[i, 0], node.boxes[j, 1] - node.boxes[j, 0])
        agg = i if widths[0] >= widths[1] else j
        if i != agg and j != agg:  # unreachable; keeps the intent explicit
            agg = min(i, j)
        lo, hi = node.boxes[agg]
        if hi - lo < _MIN_WIDTH:
            other = j if agg == i else i
            if node.boxes[other, 1] - node.boxes[other, 0] >= _MIN_WIDTH:
                agg = other
                lo, hi = node.boxes[agg]
            else:
                if resting_best is None or sign * node.bound > sign * resting_best:
                    resting_best = node.bound
                continue
        mid = 0.5 * (lo + hi)
        for new_lo, new_hi in ((lo, mid), (mid, hi)):
            child_boxes = node.boxes.copy()
            child_boxes[agg] = (new_lo, new_hi)
            child_branched = dict(node.branched)
            child_branched[agg] = (new_lo, new_hi)
            A, rels, b = relax.node_system(child_boxes, child_branched)
            if _worst_violation(A, rels, b, node.point) <= 1e-9:
                # The parent optimum survives this child's tighter envelope,
                # so the child LP optimum equals the parent bound exactly:
                # skip the solve and branch again from the same point.
                nodes += 1
                push(node.bound, child_boxes, child_branched, node.point)
                continue
            try:
                res = solve_dense_lp(
                    relax.c, A, rels, b,
                    maximize=maximize, compute_duals=False, fail_fast=True,
                )
            except SimplexInternalError:
                # Numerically hopeless sub-box: the parent bound still covers
                # it, so rest the region instead of aborting the search.
                nodes += 1
                if resting_best is None or sign * node.bound > sign * resting_best:
                    resting_best = node.bound
                continue
            lp_solves += 1
            lp_pivots += res.pivots
            nodes += 1
            if res.status == "infeasible":
                continue  # no feasible point has aggregates in this sub-box
            residual = max(residual, res.max_residual)
            child_bound = res.objective
            if sign * child_bound > sign * node.bound:  # enforce monotonicity
                child_bound = node.bound
            consider_inner(res.x[: relax.n_p], float(relax.c[: relax.n_p] @ res.x[: relax.n_p]))
            push(child_bound, child_boxes, child_branched, res.x)


# ---------------------------------------------------------------------------
# inner feasible points
# ---------------------------------------------------------------------------

@dataclass
class InnerReport:
    feasible: bool
    objective: float  # raw objective mass (not normalized)
    value: float | None  # normalized objective, None when infeasible
    point: np.ndarray | None
    residual: float
    evaluations: int


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    n = v.shape[0]
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.flatnonzero(u - css / np.arange(1, n + 1) > 0)[-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def local_search_inner(
    program: ConstraintProgram,
    sense: str,
    restarts: int = 3,
    seed: int = 0,
    max_iters: int = 60,
    eps_inner: float = EPS_INNER,
    starts: tuple[np.ndarray, ...] = (),
) -> InnerReport:
    """Search for feasible points of the (possibly bilinear) program.

    Multi-start: caller-provided starts first, then seeded Dirichlet draws.
    Each start is evaluated as-is, then polished toward feasibility with a
    damped Gauss-Newton iteration on the constraint residual vector
    (projected back onto the simplex), with a few objective-improving nudges
    once feasible.  Deterministic for a fixed seed.  The best feasible
    objective found is an attainable value, hence an inner (not certified
    outer) bound.
    """
    n = program.space.total_size
    sign = -1.0 if sense == "max" else 1.0
    c = np.zeros(n)
    c[program.objective] = 1.0
    eq_rows = [r for r in program.linear if r.relation == "="]
    A = np.zeros((len(eq_rows), n))
    b = np.zeros(len(eq_rows))
    for i, row in enumerate(eq_rows):
        np.add.at(A[i], row.indices, row.coeffs)
        b[i] = row.rhs
    bil = program.bilinear
    agg_rows = {}

    def dense_agg(offsets: np.ndarray) -> np.ndarray:
        key = offsets.tobytes()
        if key not in agg_rows:
            row = np.zeros(n)
            row[offsets] = 1.0
            agg_rows[key] = row
        return agg_rows[key]

    def residuals(p: np.ndarray) -> np.ndarray:
        lin = A @ p - b
        if not bil:
            return lin
        return np.concatenate([lin, [bc.residual(p) for bc in bil]])

    def jacobian(p: np.ndarray) -> np.ndarray:
        if not bil:
            return A
        rows = np.zeros((len(bil), n))
        for i, bc in enumerate(bil):
            a = float(p[bc.agg_a].sum())
            bb_ = float(p[bc.agg_b].sum())
            cc = float(p[bc.agg_c].sum())
            d = float(p[bc.agg_d].sum())
            rows[i] = (
                d * dense_agg(bc.agg_a)
                + a * dense_agg(bc.agg_d)
                - cc * dense_agg(bc.agg_b)
                - bb_ * dense_agg(bc.agg_c)
            )
        return np.vstack([A, rows])

    best: tuple[float, np.ndarray, float] | None = None  # (objective, point, residual)
    evaluations = 0

    def offer(p: np.ndarray) -> None:
        nonlocal best, evaluations
        evaluations += 1
        res = float(np.abs(residuals(p)).max(initial=0.0))
        if res <= eps_inner:
            obj = float(c @ p)
            if best is None or sign * obj < sign * best[0]:
                best = (obj, p.copy(), res)

    def polish(p: np.ndarray, iters: int) -> np.ndarray:
        lam = 1e-8
        for _ in range(iters):
            r = residuals(p)
            if np.abs(r).max(initial=0.0) <= eps_inner * 0.1:
                break
            J = jacobian(p)
            H = J.T @ J + lam * np.eye(n)
            try:
                step = np.linalg.solve(H, -J.T @ r)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            candidate = _project_simplex(p + step)
            if np.abs(residuals(candidate)).max(initial=0.0) < np.abs(r).max(initial=0.0):
                p = candidate
                lam = max(lam / 3.0, 1e-10)
            else:
                lam *= 10.0
                if lam > 1e6:
                    break
        return p

    all_starts = list(starts)
    rng_draws = max(0, restarts - len(all_starts))
    for k in range(rng_draws):
        rng = np.random.default_rng(np.random.SeedSequence((seed, k)))
        all_starts.append(rng.dirichlet(np.ones(n)))
    all_starts = all_starts[: max(restarts, len(starts))]

    for p0 in all_starts:
        p = np.asarray(p0, dtype=float).copy()
        total = p.sum()
        if total > 0 and abs(total - 1.0) > 1e-12:
            p = p / total
        offer(p)
        if max_iters <= 0:
            continue
        p = polish(p, max_iters)
        offer(p)
        if best is not None:
            # Objective-improving nudges with re-polish.
            eta = 0.05
            for _ in range(4):
                candidate = _project_simplex(best[1] - sign * eta * c)
                candidate = polish(candidate, max(8, max_iters // 4))
                offer(candidate)
                eta *= 0.5

    scale = program.normalizer if program.normalizer is not None else 1.0
    if best is None:
        return InnerReport(False, float("nan"), None, None, float("inf"), evaluations)
    return InnerReport(True, best[0], best[0] / scale, best[1], best[2], evaluations)


# ---------------------------------------------------------------------------
# query-level interval assembly
# ---------------------------------------------------------------------------

@dataclass
class IntervalResult:
    interval: BoundsInterval
    lower: SolveReport
    upper: SolveReport

    @property
    def nodes_explored(self) -> int:
        return self.lower.nodes_explored + self.upper.nodes_explored

    @property
    def lp_pivots(self) -> int:
        return self.lower.lp_pivots + self.upper.lp_pivots

    @property
    def runtime_ms(self) -> float:
        return self.lower.runtime_ms + self.upper.runtime_ms


def solve_query_interval(
    program: ConstraintProgram,
    budget: int = 2000,
    gap_tol: float = 1e-3,
    stall_rounds: int | None = 20,
    seed: int = 0,
    inner_restarts: int = 2,
    inner_starts: tuple[np.ndarray, ...] = (),
) -> IntervalResult:
    """Certified [lb, ub] on the query by solving both senses.

    The reported interval clamps to [0, 1] (queries are probabilities, so
    clamping preserves certification) and contains the true identified set.
    Raises when either sense is infeasible; callers wanting the hint should
    inspect the reports in the raised error.
    """
    if program.bilinear:
        boxes = tighten_aggregate_boxes(program)
        if boxes is None:
            lo = solve_lp_linear_part(program, "min")
            raise InfeasibleProgramError(lo.infeasibility_hint)
        lower = bb_solve(
            program,
            "min",
            budget=budget,
            gap_tol=gap_tol,
            stall_rounds=stall_rounds,
            seed=seed,
            boxes=boxes,
            inner_restarts=inner_restarts,
            inner_starts=inner_starts,
        )
        upper = bb_solve(
            program,
            "max",
            budget=budget,
            gap_tol=gap_tol,
            stall_rounds=stall_rounds,
            seed=seed,
            boxes=boxes,
            inner_restarts=inner_restarts,
            inner_starts=inner_starts,
        )
    else:
        lower = solve_lp(program, "min")
        upper = solve_lp(program, "max")
    if lower.status == STATUS_INFEASIBLE or upper.status == STATUS_INFEASIBLE:
        bad = lower if lower.status == STATUS_INFEASIBLE else upper
        raise InfeasibleProgramError(bad.infeasibility_hint)
    lo = min(max(lower.value, 0.0), 1.0)
    hi = min(max(upper.value, 0.0), 1.0)
    if lo > hi:  # numerically collapsed interval
        lo = hi = 0.5 * (lo + hi)
    return IntervalResult(BoundsInterval(lo, hi), lower, upper)


def solve_lp_linear_part(program: ConstraintProgram, sense: str) -> SolveReport:
    """Solve only the linear rows of a program (drops bilinear constraints)."""
    linear_only = ConstraintProgram(
        space=program.space,
        objective=program.objective,
        linear=program.linear,
        bilinear=(),
        normalizer=program.normalizer,
        aux_names=program.aux_names,
    )
    return solve_lp(linear_only, sense)


class InfeasibleProgramError(RuntimeError):
    """No distribution satisfies the evidence constraints."""

    def __init__(self, hint: tuple[str, ...]):
        families = ", ".join(hint) if hint else "unknown family"
        super().__init__(f"program infeasible; conflicting evidence near: {families}")
        self.hint = hint
