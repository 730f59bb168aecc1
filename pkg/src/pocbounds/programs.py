"""Construction of counterfactual optimization programs from evidence.

Three builders cover the three evidence regimes:

- :func:`build_nondescendant_program`: covariates jointly observed with
  treatment and outcome; every conditioning subset present in the evidence
  contributes equality rows (the tightest covariate-only program).
- :func:`build_covariate_specific_program`: covariates observed one at a
  time (pairwise joints only); same row generator restricted to families
  that condition on at most one covariate, all sharing one program.
- :func:`build_mediator_program`: a mediator between treatment and outcome,
  plus back-door covariates; emits the linear rows over the extended space
  and the bilinear independence constraints that make the program non-convex.

All programs share the structure: decision vector p is a joint distribution
over a :class:`~pocbounds.model.CounterfactualSpace`, the simplex rows are
always present, evidence rows are 0/1 indicator sums, and the objective is a
0/1 indicator row selected by the query (optionally divided by an evidence
normalizer after optimization).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .model import (
    KIND_EXPERIMENTAL,
    KIND_OBSERVATIONAL,
    QUERY_PNS,
    BoundsInterval,
    CounterfactualSpace,
    EvidenceError,
    EvidenceFamily,
    EvidenceSet,
    QuerySpec,
    SchemaError,
    mediator_space,
    outcome_space,
)

NORMALIZATION_LABEL = "simplex-normalization"


@dataclass(frozen=True)
class LinearConstraint:
    """A sparse linear row over the program columns.

    Evidence-derived rows always carry coefficient 1.0 on every listed
    column; relaxation machinery may emit general coefficients.
    """

    indices: np.ndarray
    coeffs: np.ndarray
    rhs: float
    relation: str = "="
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.intp))
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))
        if self.indices.shape != self.coeffs.shape:
            raise ValueError("indices and coeffs must align")
        self.indices.setflags(write=False)
        self.coeffs.setflags(write=False)

    @classmethod
    def indicator(
        cls, offsets: np.ndarray, rhs: float, label: str, relation: str = "="
    ) -> "LinearConstraint":
        offsets = np.asarray(offsets, dtype=np.intp)
        return cls(offsets, np.ones(offsets.shape[0]), float(rhs), relation, label)

    def dense(self, n_cols: int) -> np.ndarray:
        row = np.zeros(n_cols)
        row[self.indices] = self.coeffs
        return row

    def value(self, x: np.ndarray) -> float:
        return float(x[self.indices] @ self.coeffs)

    def dedup_key(self) -> tuple:
        order = np.argsort(self.indices, kind="stable")
        return (
            self.relation,
            self.rhs,
            self.indices[order].tobytes(),
            self.coeffs[order].tobytes(),
        )


@dataclass(frozen=True)
class BilinearConstraint:
    """Equality of two products of linear aggregates: (A.p)(D.p) = (B.p)(C.p).

    Each aggregate is a sparse 0/1 indicator row, stored as its column
    offsets.  The orientation of the four slots carries the meaning; see the
    mediator builder for how conditional independencies map onto it.
    """

    agg_a: np.ndarray
    agg_b: np.ndarray
    agg_c: np.ndarray
    agg_d: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        for name in ("agg_a", "agg_b", "agg_c", "agg_d"):
            arr = np.asarray(getattr(self, name), dtype=np.intp)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def residual(self, p: np.ndarray) -> float:
        a = float(p[self.agg_a].sum())
        b = float(p[self.agg_b].sum())
        c = float(p[self.agg_c].sum())
        d = float(p[self.agg_d].sum())
        return a * d - b * c

    def dedup_key(self) -> tuple:
        sides = sorted(
            [
                (self.agg_a.tobytes(), self.agg_d.tobytes()),
                (self.agg_b.tobytes(), self.agg_c.tobytes()),
            ]
        )
        # (A,D) and (D,A) are the same product; normalize each side too.
        normalized = tuple(tuple(sorted(side)) for side in sides)
        return normalized


@dataclass(frozen=True)
class ConstraintProgram:
    """A counterfactual optimization program over a flattened joint p.

    ``objective`` lists the cells whose total mass is optimized.  When
    ``normalizer`` is set, reported bounds are objective optima divided by
    it (used for conditional queries).  ``aux_names`` is nonempty only for
    relaxations, whose columns extend beyond the space's cells.
    """

    space: CounterfactualSpace
    objective: np.ndarray
    linear: tuple[LinearConstraint, ...]
    bilinear: tuple[BilinearConstraint, ...] = ()
    normalizer: float | None = None
    aux_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        obj = np.asarray(self.objective, dtype=np.intp)
        obj.setflags(write=False)
        object.__setattr__(self, "objective", obj)

    @property
    def n_cells(self) -> int:
        return self.space.total_size

    @property
    def n_cols(self) -> int:
        return self.space.total_size + len(self.aux_names)

    def objective_row(self) -> np.ndarray:
        row = np.zeros(self.n_cols)
        row[self.objective] = 1.0
        return row

    def linear_residuals(self, p: np.ndarray) -> np.ndarray:
        """Signed residuals (lhs - rhs) of every linear row at p."""
        return np.array([c.value(p) - c.rhs for c in self.linear])

    def bilinear_residuals(self, p: np.ndarray) -> np.ndarray:
        return np.array([c.residual(p) for c in self.bilinear])

    def max_violation(self, p: np.ndarray) -> float:
        worst = 0.0
        for c in self.linear:
            r = c.value(p) - c.rhs
            if c.relation == "=":
                worst = max(worst, abs(r))
            elif c.relation == "<=":
                worst = max(worst, r)
            else:
                worst = max(worst, -r)
        for bc in self.bilinear:
            worst = max(worst, abs(bc.residual(p)))
        worst = max(worst, float(-(p[: self.n_cells].min(initial=0.0))))
        return worst


class _RowCollector:
    """Accumulates rows, dropping exact duplicates (first label wins)."""

    def __init__(self) -> None:
        self.rows: list[LinearConstraint] = []
        self._seen: set[tuple] = set()

    def add(self, row: LinearConstraint) -> None:
        key = row.dedup_key()
        if key in self._seen:
            return
        self._seen.add(key)
        self.rows.append(row)


def _z_axis_map(evidence: EvidenceSet, space: CounterfactualSpace) -> dict[str, int]:
    return {v.name: space.z_axis(i) for i, v in enumerate(evidence.covariates)}


def _family_rows(
    collector: _RowCollector,
    evidence: EvidenceSet,
    space: CounterfactualSpace,
    fam: EvidenceFamily,
) -> None:
    """Emit the equality rows contributed by one evidence family."""
    z_axes = _z_axis_map(evidence, space)
    fam_axes = [z_axes[name] for name in fam.covariates]
    fam_cards = [evidence.covariate(name).cardinality for name in fam.covariates]
    table = np.asarray(fam.table)
    n_arms = space.n_arms
    n_y = space.outcome_card

    for t in range(n_arms):
        for s in range(n_y):
            for z_cell in itertools.product(*(range(card) for card in fam_cards)):
                fixed = {space.y_axis(t): s}
                fixed.update(dict(zip(fam_axes, z_cell)))
                if fam.kind == KIND_EXPERIMENTAL:
                    rhs = table[(t, s) + z_cell]
                    offsets = space.offsets_where(fixed)
                    collector.add(
                        LinearConstraint.indicator(
                            offsets, rhs, f"{fam.label}[t={t},s={s},z={z_cell}]"
                        )
                    )
                else:
                    fixed[space.x_axis] = t
                    if fam.with_mediator:
                        for u in range(space.w_card or 0):
                            cell_fixed = dict(fixed)
                            cell_fixed[space.w_actual_axis] = u
                            rhs = table[(t, s, u) + z_cell]
                            offsets = space.offsets_where(cell_fixed)
                            collector.add(
                                LinearConstraint.indicator(
                                    offsets,
                                    rhs,
                                    f"{fam.label}[t={t},s={s},w={u},z={z_cell}]",
                                )
                            )
                    else:
                        rhs = table[(t, s) + z_cell]
                        offsets = space.offsets_where(fixed)
                        collector.add(
                            LinearConstraint.indicator(
                                offsets, rhs, f"{fam.label}[t={t},s={s},z={z_cell}]"
                            )
                        )


def objective_for_query(
    space: CounterfactualSpace, query: QuerySpec, evidence: EvidenceSet | None = None
) -> tuple[np.ndarray, float | None]:
    """Objective cell offsets and optional normalizer for a query.

    PNS(k) selects the cells where the first k potential-outcome axes hit
    their target values and needs no normalizer.  PN and PS select the cells
    of the factual event with the counterfactual outcome flipped; their
    normalizer is the factual cell probability taken from evidence (never
    re-derived from the program).
    """
    if query.kind == QUERY_PNS:
        if query.k > space.n_arms:
            raise SchemaError(
                f"pns query with k={query.k} exceeds {space.n_arms} treatment arms"
            )
        outcomes = query.resolved_outcomes(space.outcome_card)
        fixed = {space.y_axis(t): outcomes[t] for t in range(query.k)}
        return space.offsets_where(fixed), None

    # PN / PS: binary treatment and outcome only.
    if space.n_arms != 2 or space.outcome_card != 2:
        raise SchemaError("pn/ps queries require binary treatment and outcome")
    x_val, y_val = query.resolved_event()
    fixed = {
        space.y_axis(x_val): y_val,  # consistency: factual outcome at factual arm
        space.y_axis(1 - x_val): 1 - y_val,  # counterfactual arm flips the outcome
        space.x_axis: x_val,
    }
    offsets = space.offsets_where(fixed)
    if evidence is None:
        raise SchemaError("pn/ps queries need evidence to supply the normalizer")
    joint = evidence.observational_joint_xy()
    if joint is None:
        raise SchemaError(
            "missing normalizer: pn/ps require an observational family "
            "supplying the factual cell probability"
        )
    normalizer = float(joint[x_val, y_val])
    if normalizer <= 0.0:
        raise EvidenceError(
            f"query undefined: factual cell P(x={x_val}, y={y_val}) = 0"
        )
    return offsets, normalizer


def _covariate_program(
    evidence: EvidenceSet, query: QuerySpec, builder_name: str
) -> ConstraintProgram:
    if any(f.with_mediator for f in evidence.families):
        raise SchemaError(
            f"{builder_name} cannot use mediator evidence; "
            "use build_mediator_program instead"
        )
    space = outcome_space(
        evidence.treatment.cardinality, evidence.outcome.cardinality, evidence.z_cards
    )
    collector = _RowCollector()
    collector.add(
        LinearConstraint.indicator(
            np.arange(space.total_size), 1.0, NORMALIZATION_LABEL
        )
    )
    for fam in evidence.families:
        _family_rows(collector, evidence, space, fam)
    objective, normalizer = objective_for_query(space, query, evidence)
    return ConstraintProgram(
        space=space,
        objective=objective,
        linear=tuple(collector.rows),
        normalizer=normalizer,
    )


def build_nondescendant_program(
    evidence: EvidenceSet, query: QuerySpec
) -> ConstraintProgram:
    """Program for jointly observed non-descendant covariates.

    Every experimental or observational family present contributes one
    equality row per cell, with the potential-outcome axis of its arm fixed
    (plus the treatment axis for observational rows, which encodes
    consistency).  Supplying families for all covariate subsets yields the
    tightest covariate-only program; supplying fewer is allowed and simply
    omits those rows.
    """
    return _covariate_program(evidence, query, "build_nondescendant_program")


def build_covariate_specific_program(
    evidence: EvidenceSet, query: QuerySpec
) -> ConstraintProgram:
    """Program for covariates observed one at a time.

    Accepts only families conditioning on at most one covariate; all of them
    constrain the same joint program, which is what makes this tighter than
    intersecting per-covariate bounds.  With a single covariate the emitted
    constraint set is identical to :func:`build_nondescendant_program`.
    """
    for fam in evidence.families:
        if len(fam.covariates) > 1:
            raise SchemaError(
                f"family {fam.label} conditions on {len(fam.covariates)} covariates; "
                "use build_nondescendant_program for jointly observed covariates"
            )
    return _covariate_program(evidence, query, "build_covariate_specific_program")


def build_mediator_program(
    evidence: EvidenceSet,
    query: QuerySpec,
    literal_orientation: bool = False,
    mediator_consistency_rows: bool = False,
) -> ConstraintProgram:
    """Program for a mediator with back-door covariates.

    Linear rows mirror the covariate builders over the extended space (the
    mediator column of observational families is fixed alongside treatment
    when present).  On top of those, two families of bilinear constraints
    encode conditional independencies that hold in the assumed graph:

    - Y_x independent of X given (W_x, Z):  a*d = b*c per (s, t, v, u, z),
      with a = P(Y@x_t=s, W@x_t=u, z), b = a-with-X=v, c = P(W@x_t=u, z),
      d = c-with-X=v;
    - Y_x independent of W_x' given (W_x, Z):  f*g = e*h per
      (s, t<t', u, v, z), with e = a, f = e-with-W@x_t'=v, g = c,
      h = g-with-W@x_t'=v.

    ``literal_orientation=True`` swaps each family to the transcription
    a*c = b*d / e*g = f*h instead; it does not correspond to the stated
    independencies and exists for comparison only.  Instances are emitted
    only for covariate cells with positive observed mass when a full-joint
    observational family is available.  ``mediator_consistency_rows`` adds
    the optional rows forcing W@x_t = W on cells with X = t; they are off by
    default because the bilinear families do not assume them.
    """
    mediator = evidence.mediator
    if mediator is None:
        raise SchemaError("build_mediator_program requires a declared mediator")
    space = mediator_space(
        evidence.treatment.cardinality,
        evidence.outcome.cardinality,
        mediator.cardinality,
        evidence.z_cards,
    )
    collector = _RowCollector()
    collector.add(
        LinearConstraint.indicator(
            np.arange(space.total_size), 1.0, NORMALIZATION_LABEL
        )
    )
    for fam in evidence.families:
        _family_rows(collector, evidence, space, fam)

    if mediator_consistency_rows:
        for t in range(space.n_arms):
            offsets_list = [
                space.offsets_where(
                    {space.x_axis: t, space.w_axis(t): u, space.w_actual_axis: w}
                )
                for u in range(mediator.cardinality)
                for w in range(mediator.cardinality)
                if u != w
            ]
            offsets = np.concatenate(offsets_list) if offsets_list else np.array([], dtype=np.intp)
            collector.add(
                LinearConstraint.indicator(
                    offsets, 0.0, f"mediator-consistency[X={t}]"
                )
            )

    bilinear = _mediator_bilinear(evidence, space, literal_orientation)
    objective, normalizer = objective_for_query(space, query, evidence)
    return ConstraintProgram(
        space=space,
        objective=objective,
        linear=tuple(collector.rows),
        bilinear=bilinear,
        normalizer=normalizer,
    )


def _positive_z_cells(
    evidence: EvidenceSet,
) -> list[tuple[int, ...]] | None:
    """Covariate cells with positive observed mass, or None if unknown.

    Only a full-joint observational family (conditioning on every declared
    covariate) can certify that a covariate cell has zero mass.
    """
    all_names = tuple(v.name for v in evidence.covariates)
    fam = evidence.find_family(KIND_OBSERVATIONAL, all_names, with_mediator=True)
    if fam is None:
        fam = evidence.find_family(KIND_OBSERVATIONAL, all_names, with_mediator=False)
    if fam is None:
        return None
    mass = fam.z_marginal()
    cells = [
        tuple(int(v) for v in cell)
        for cell in np.ndindex(*mass.shape)
        if mass[cell] > 0.0
    ]
    return cells


def _mediator_bilinear(
    evidence: EvidenceSet,
    space: CounterfactualSpace,
    literal_orientation: bool,
) -> tuple[BilinearConstraint, ...]:
    n_arms = space.n_arms
    n_y = space.outcome_card
    w_card = space.w_card or 0
    z_axes = [space.z_axis(i) for i in range(len(space.z_cards))]

    z_cells = _positive_z_cells(evidence)
    if z_cells is None:
        z_cells = [tuple(c) for c in itertools.product(*(range(k) for k in space.z_cards))]

    constraints: list[BilinearConstraint] = []
    seen: set[tuple] = set()

    def z_fixed(cell: tuple[int, ...]) -> dict[int, int]:
        return dict(zip(z_axes, cell))

    def add(con: BilinearConstraint) -> None:
        key = con.dedup_key()
        if key not in seen:
            seen.add(key)
            constraints.append(con)

    for z_cell in z_cells:
        base = z_fixed(z_cell)
        for t in range(n_arms):
            for u in range(w_card):
                c_off = space.offsets_where({**base, space.w_axis(t): u})
                for s in range(n_y):
                    a_off = space.offsets_where(
                        {**base, space.w_axis(t): u, space.y_axis(t): s}
                    )
                    for v in range(n_arms):
                        b_off = space.offsets_where(
                            {
                                **base,
                                space.w_axis(t): u,
                                space.y_axis(t): s,
                                space.x_axis: v,
                            }
                        )
                        d_off = space.offsets_where(
                            {**base, space.w_axis(t): u, space.x_axis: v}
                        )
                        label = f"Y@x{t}_indep_X[s={s},u={u},v={v},z={z_cell}]"
                        if literal_orientation:
                            con = BilinearConstraint(a_off, b_off, d_off, c_off, label)
                        else:
                            con = BilinearConstraint(a_off, b_off, c_off, d_off, label)
                        add(con)
            for t2 in range(n_arms):
                if t2 <= t:
                    continue
                for u in range(w_card):
                    g_off = space.offsets_where({**base, space.w_axis(t): u})
                    for v in range(w_card):
                        h_off = space.offsets_where(
                            {**base, space.w_axis(t): u, space.w_axis(t2): v}
                        )
                        for s in range(n_y):
                            e_off = space.offsets_where(
                                {**base, space.w_axis(t): u, space.y_axis(t): s}
                            )
                            f_off = space.offsets_where(
                                {
                                    **base,
                                    space.w_axis(t): u,
                                    space.y_axis(t): s,
                                    space.w_axis(t2): v,
                                }
                            )
                            label = (
                                f"Y@x{t}_indep_W@x{t2}[s={s},u={u},v={v},z={z_cell}]"
                            )
                            if literal_orientation:
                                con = BilinearConstraint(e_off, f_off, h_off, g_off, label)
                            else:
                                con = BilinearConstraint(f_off, e_off, h_off, g_off, label)
                            add(con)
    return tuple(constraints)


# ---------------------------------------------------------------------------
# McCormick relaxation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BilinearStructure:
    """Deduplicated aggregates and products referenced by bilinear rows.

    ``aggregates`` holds the unique indicator rows (first-seen order over
    slots A, B, C, D of each constraint).  ``products`` holds unique
    unordered aggregate-id pairs.  ``equalities`` pairs product ids:
    products[i] == products[j] for every bilinear constraint.
    """

    aggregates: tuple[np.ndarray, ...]
    products: tuple[tuple[int, int], ...]
    equalities: tuple[tuple[int, int], ...]

    @property
    def n_aggregates(self) -> int:
        return len(self.aggregates)

    @property
    def n_products(self) -> int:
        return len(self.products)

    def aggregate_values(self, p: np.ndarray) -> np.ndarray:
        return np.array([float(p[idx].sum()) for idx in self.aggregates])


def bilinear_structure(program: ConstraintProgram) -> BilinearStructure:
    """Extract the shared aggregate/product bookkeeping of a program."""
    agg_ids: dict[bytes, int] = {}
    aggregates: list[np.ndarray] = []

    def agg_id(offsets: np.ndarray) -> int:
        key = offsets.tobytes()
        if key not in agg_ids:
            agg_ids[key] = len(aggregates)
            aggregates.append(offsets)
        return agg_ids[key]

    prod_ids: dict[tuple[int, int], int] = {}
    products: list[tuple[int, int]] = []

    def prod_id(i: int, j: int) -> int:
        key = (i, j) if i <= j else (j, i)
        if key not in prod_ids:
            prod_ids[key] = len(products)
            products.append(key)
        return prod_ids[key]

    equalities: list[tuple[int, int]] = []
    for con in program.bilinear:
        ia, ib = agg_id(con.agg_a), agg_id(con.agg_b)
        ic, id_ = agg_id(con.agg_c), agg_id(con.agg_d)
        left = prod_id(ia, id_)
        right = prod_id(ib, ic)
        equalities.append((left, right))
    return BilinearStructure(tuple(aggregates), tuple(products), tuple(equalities))


def mccormick_envelope_rows(
    w_col: int,
    u_col: int,
    v_col: int,
    u_box: tuple[float, float],
    v_box: tuple[float, float],
    label: str,
) -> list[LinearConstraint]:
    """The four envelope inequalities for w = u*v over a box.

    On the unit box these reduce to w >= 0, w >= u + v - 1, w <= u, w <= v.
    Columns u and v may coincide with linear-expression auxiliaries or be
    substituted by callers; here they are plain column indices.
    """
    (lu, uu), (lv, uv) = u_box, v_box
    rows = [
        # w >= lu*v + lv*u - lu*lv
        LinearConstraint(
            np.array([w_col, v_col, u_col]),
            np.array([-1.0, lu, lv]),
            lu * lv,
            "<=",
            f"{label}:env-ll",
        ),
        # w >= uu*v + uv*u - uu*uv
        LinearConstraint(
            np.array([w_col, v_col, u_col]),
            np.array([-1.0, uu, uv]),
            uu * uv,
            "<=",
            f"{label}:env-uu",
        ),
        # w <= uu*v + lv*u - uu*lv
        LinearConstraint(
            np.array([w_col, v_col, u_col]),
            np.array([1.0, -uu, -lv]),
            -uu * lv,
            "<=",
            f"{label}:env-ul",
        ),
        # w <= lu*v + uv*u - lu*uv
        LinearConstraint(
            np.array([w_col, v_col, u_col]),
            np.array([1.0, -lu, -uv]),
            -lu * uv,
            "<=",
            f"{label}:env-lu",
        ),
    ]
    return rows


def mccormick_relax(
    program: ConstraintProgram,
    boxes: np.ndarray | None = None,
) -> ConstraintProgram:
    """Linear relaxation of a bilinear program via McCormick envelopes.

    Appends one auxiliary column per unique aggregate (tied to its indicator
    row by an equality) and one per unique product, bounded by the four
    envelope inequalities over the aggregate boxes; every bilinear equality
    becomes an equality of two product auxiliaries.  ``boxes`` has shape
    (n_aggregates, 2) in the id order of :func:`bilinear_structure` and
    defaults to [0, 1] everywhere.  The result's feasible set contains every
    feasible point of the original program whose aggregates lie inside the
    boxes, so optima of the relaxation are certified outer bounds.
    """
    structure = bilinear_structure(program)
    n_agg, n_prod = structure.n_aggregates, structure.n_products
    if boxes is None:
        boxes = np.tile(np.array([0.0, 1.0]), (n_agg, 1))
    boxes = np.asarray(boxes, dtype=float)
    if boxes.shape != (n_agg, 2):
        raise ValueError(f"boxes must have shape ({n_agg}, 2)")

    n_p = program.space.total_size
    agg_col = {i: n_p + i for i in range(n_agg)}
    prod_col = {k: n_p + n_agg + k for k in range(n_prod)}
    aux_names = tuple(f"agg{i}" for i in range(n_agg)) + tuple(
        f"prod{k}" for k in range(n_prod)
    )

    rows = list(program.linear)
    for i, offsets in enumerate(structure.aggregates):
        # u_i - (A_i . p) = 0
        idx = np.concatenate([np.array([agg_col[i]]), offsets])
        coeffs = np.concatenate([np.array([1.0]), -np.ones(offsets.shape[0])])
        rows.append(LinearConstraint(idx, coeffs, 0.0, "=", f"agg{i}:tie"))
        lo, hi = boxes[i]
        if lo > 0.0:
            rows.append(
                LinearConstraint(
                    np.array([agg_col[i]]), np.array([1.0]), lo, ">=", f"agg{i}:lo"
                )
            )
        if hi < 1.0:
            rows.append(
                LinearConstraint(
                    np.array([agg_col[i]]), np.array([1.0]), hi, "<=", f"agg{i}:hi"
                )
            )
    for k, (i, j) in enumerate(structure.products):
        rows.extend(
            mccormick_envelope_rows(
                prod_col[k],
                agg_col[i],
                agg_col[j],
                (boxes[i][0], boxes[i][1]),
                (boxes[j][0], boxes[j][1]),
                f"prod{k}",
            )
        )
    seen_eq: set[tuple[int, int]] = set()
    for left, right in structure.equalities:
        if left == right or (left, right) in seen_eq:
            continue
        seen_eq.add((left, right))
        rows.append(
            LinearConstraint(
                np.array([prod_col[left], prod_col[right]]),
                np.array([1.0, -1.0]),
                0.0,
                "=",
                f"prod{left}=prod{right}",
            )
        )

    return ConstraintProgram(
        space=program.space,
        objective=program.objective,
        linear=tuple(rows),
        bilinear=(),
        normalizer=program.normalizer,
        aux_names=aux_names,
    )
