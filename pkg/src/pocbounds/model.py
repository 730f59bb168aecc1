"""Core data model: variables, counterfactual spaces, evidence, queries.

Everything downstream (program construction, solvers, the simulation lab and
the CLI) is phrased in terms of the types defined here.  Conventions used
throughout the package:

- all value indices are 0-based;
- a "counterfactual space" is the finite product space over potential-outcome
  axes plus observed-variable axes, flattened row-major with the first axis
  most significant;
- evidence comes in *families*: complete dense tables of one distribution
  kind (experimental or observational) under one conditioning pattern.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

# Default tolerances.  Evidence consistency is judged against EPS_EVIDENCE,
# numerical identities (LP residuals, duality gaps) against EPS_NUM.
EPS_EVIDENCE = 1e-6
EPS_NUM = 1e-8
EPS_INNER = 1e-6

ROLE_TREATMENT = "treatment"
ROLE_OUTCOME = "outcome"
ROLE_NONDESC = "nondescendant_covariate"
ROLE_BACKDOOR = "backdoor_covariate"
ROLE_MEDIATOR = "mediator"
COVARIATE_ROLES = (ROLE_NONDESC, ROLE_BACKDOOR)
ALL_ROLES = (ROLE_TREATMENT, ROLE_OUTCOME, ROLE_NONDESC, ROLE_BACKDOOR, ROLE_MEDIATOR)

KIND_EXPERIMENTAL = "experimental"
KIND_OBSERVATIONAL = "observational"


class SchemaError(ValueError):
    """Structurally invalid problem input (roles, shapes, missing pieces)."""


class EvidenceError(ValueError):
    """Evidence that is complete in form but inconsistent in content."""

    def __init__(self, message: str, report: "ValidationReport | None" = None):
        super().__init__(message)
        self.report = report


# ---------------------------------------------------------------------------
# index arithmetic
# ---------------------------------------------------------------------------

def index_flatten(sizes: Sequence[int], indices: Sequence[int]) -> int:
    """Flatten a multi-index row-major; the first axis is most significant."""
    if len(sizes) != len(indices):
        raise ValueError(f"rank mismatch: {len(sizes)} axes, {len(indices)} indices")
    flat = 0
    for size, idx in zip(sizes, indices):
        if not 0 <= idx < size:
            raise ValueError(f"index {idx} out of range for axis of size {size}")
        flat = flat * size + idx
    return flat


def index_unflatten(sizes: Sequence[int], flat: int) -> tuple[int, ...]:
    """Inverse of :func:`index_flatten`."""
    total = math.prod(sizes)
    if not 0 <= flat < total:
        raise ValueError(f"flat index {flat} out of range for total size {total}")
    out = []
    for size in reversed(sizes):
        out.append(flat % size)
        flat //= size
    return tuple(reversed(out))


# ---------------------------------------------------------------------------
# variables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VariableSpec:
    """A named finite-cardinality variable with a causal role."""

    name: str
    role: str
    cardinality: int

    def __post_init__(self) -> None:
        if not self.name:
            raise SchemaError("variable name must be nonempty")
        if self.role not in ALL_ROLES:
            raise SchemaError(f"unknown role {self.role!r} for variable {self.name!r}")
        if self.cardinality < 2:
            raise SchemaError(
                f"variable {self.name!r} needs cardinality >= 2, got {self.cardinality}"
            )


# ---------------------------------------------------------------------------
# counterfactual space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CounterfactualSpace:
    """Product space of potential-outcome axes and observed-variable axes.

    Axis layout for a problem without a mediator (n arms, m covariates)::

        [Y@x_0, ..., Y@x_{n-1}, Z_1, ..., Z_m, X]

    and with a mediator W::

        [Y@x_0, ..., Y@x_{n-1}, W@x_0, ..., W@x_{n-1}, Z_1, ..., Z_m, W, X]

    Cells are flattened row-major (first axis most significant).
    """

    axis_labels: tuple[str, ...]
    axis_sizes: tuple[int, ...]
    n_arms: int
    outcome_card: int
    z_cards: tuple[int, ...]
    w_card: int | None = None  # set iff the space carries mediator axes

    def __post_init__(self) -> None:
        if len(self.axis_labels) != len(self.axis_sizes):
            raise SchemaError("axis labels and sizes must align")
        expected = self.n_arms + len(self.z_cards) + 1
        if self.w_card is not None:
            expected += self.n_arms + 1
        if len(self.axis_sizes) != expected:
            raise SchemaError("axis count does not match space structure")

    # -- axis positions -----------------------------------------------------

    def y_axis(self, arm: int) -> int:
        self._check_arm(arm)
        return arm

    def w_axis(self, arm: int) -> int:
        if self.w_card is None:
            raise SchemaError("space has no mediator axes")
        self._check_arm(arm)
        return self.n_arms + arm

    def z_axis(self, i: int) -> int:
        if not 0 <= i < len(self.z_cards):
            raise SchemaError(f"covariate index {i} out of range")
        offset = self.n_arms if self.w_card is None else 2 * self.n_arms
        return offset + i

    @property
    def w_actual_axis(self) -> int:
        if self.w_card is None:
            raise SchemaError("space has no mediator axes")
        return 2 * self.n_arms + len(self.z_cards)

    @property
    def x_axis(self) -> int:
        return len(self.axis_sizes) - 1

    @property
    def total_size(self) -> int:
        return math.prod(self.axis_sizes)

    def _check_arm(self, arm: int) -> None:
        if not 0 <= arm < self.n_arms:
            raise SchemaError(f"arm index {arm} out of range for {self.n_arms} arms")

    # -- cell enumeration ---------------------------------------------------

    def value_grid(self) -> np.ndarray:
        """Array of shape (n_axes, total_size); grid[a, f] = axis-a value of cell f."""
        grid = np.unravel_index(np.arange(self.total_size), self.axis_sizes)
        return np.vstack(grid)

    def offsets_where(self, fixed: Mapping[int, int]) -> np.ndarray:
        """Flat offsets of all cells whose axis values match ``fixed``."""
        grid = self.value_grid()
        mask = np.ones(self.total_size, dtype=bool)
        for axis, value in fixed.items():
            if not 0 <= value < self.axis_sizes[axis]:
                raise ValueError(
                    f"value {value} out of range for axis {self.axis_labels[axis]}"
                )
            mask &= grid[axis] == value
        return np.flatnonzero(mask)

    def flatten(self, indices: Sequence[int]) -> int:
        return index_flatten(self.axis_sizes, indices)

    def unflatten(self, flat: int) -> tuple[int, ...]:
        return index_unflatten(self.axis_sizes, flat)


def outcome_space(n_arms: int, outcome_card: int, z_cards: Sequence[int]) -> CounterfactualSpace:
    """Space [Y@x_0..Y@x_{n-1}, Z_1..Z_m, X] for covariate-only problems."""
    z_cards = tuple(z_cards)
    labels = tuple(f"Y@x{t}" for t in range(n_arms))
    labels += tuple(f"Z{i + 1}" for i in range(len(z_cards)))
    labels += ("X",)
    sizes = (outcome_card,) * n_arms + z_cards + (n_arms,)
    return CounterfactualSpace(labels, sizes, n_arms, outcome_card, z_cards)


def mediator_space(
    n_arms: int, outcome_card: int, w_card: int, z_cards: Sequence[int]
) -> CounterfactualSpace:
    """Space [Y@x_t..., W@x_t..., Z_1..Z_m, W, X] for mediator problems."""
    z_cards = tuple(z_cards)
    labels = tuple(f"Y@x{t}" for t in range(n_arms))
    labels += tuple(f"W@x{t}" for t in range(n_arms))
    labels += tuple(f"Z{i + 1}" for i in range(len(z_cards)))
    labels += ("W", "X")
    sizes = (outcome_card,) * n_arms + (w_card,) * n_arms + z_cards + (w_card, n_arms)
    return CounterfactualSpace(labels, sizes, n_arms, outcome_card, z_cards, w_card)


# ---------------------------------------------------------------------------
# evidence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvidenceEntry:
    """One cell of one evidence family, as it appears in problem documents.

    ``treatment_value`` is the do() arm for experimental entries and the
    observed treatment for observational ones.  ``z_values`` maps covariate
    names to values and fixes the family's conditioning pattern.
    """

    kind: str
    treatment_value: int
    outcome_value: int
    probability: float
    z_values: tuple[tuple[str, int], ...] = ()
    mediator_value: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in (KIND_EXPERIMENTAL, KIND_OBSERVATIONAL):
            raise SchemaError(f"unknown evidence kind {self.kind!r}")
        if self.kind == KIND_EXPERIMENTAL and self.mediator_value is not None:
            raise SchemaError("experimental entries cannot carry a mediator value")


@dataclass(frozen=True)
class EvidenceFamily:
    """A complete dense table for one (kind, conditioning pattern) family.

    Table axis order: (treatment, outcome[, mediator], *covariates), with the
    covariate axes following ``covariates`` order (which itself must follow
    the declared variable order of the evidence set).
    """

    kind: str
    covariates: tuple[str, ...]
    with_mediator: bool
    table: np.ndarray

    def __post_init__(self) -> None:
        if self.kind not in (KIND_EXPERIMENTAL, KIND_OBSERVATIONAL):
            raise SchemaError(f"unknown evidence kind {self.kind!r}")
        if self.with_mediator and self.kind != KIND_OBSERVATIONAL:
            raise SchemaError("only observational families may include the mediator")
        expected_rank = 2 + int(self.with_mediator) + len(self.covariates)
        if self.table.ndim != expected_rank:
            raise SchemaError(
                f"family table rank {self.table.ndim} does not match "
                f"conditioning pattern (expected {expected_rank})"
            )
        if len(set(self.covariates)) != len(self.covariates):
            raise SchemaError("family lists a covariate twice")
        # Freeze the payload so families can be shared across threads.
        self.table.setflags(write=False)

    @property
    def key(self) -> tuple[str, tuple[str, ...], bool]:
        return (self.kind, self.covariates, self.with_mediator)

    @property
    def label(self) -> str:
        parts = ["P("]
        if self.kind == KIND_EXPERIMENTAL:
            parts.append("Y_x")
        else:
            parts.append("X,Y")
            if self.with_mediator:
                parts.append(",W")
        for name in self.covariates:
            parts.append(f",{name}")
        parts.append(")")
        return "".join(parts)

    def z_marginal(self) -> np.ndarray:
        """Covariate-cell mass implied by this family (sums out everything else)."""
        lead = 2 + int(self.with_mediator)
        return self.table.sum(axis=tuple(range(lead)))


@dataclass(frozen=True)
class EvidenceSet:
    """Declared variables plus every evidence family supplied for them."""

    variables: tuple[VariableSpec, ...]
    families: tuple[EvidenceFamily, ...]

    def __post_init__(self) -> None:
        roles: dict[str, list[VariableSpec]] = {}
        seen: set[str] = set()
        for v in self.variables:
            if v.name in seen:
                raise SchemaError(f"duplicate variable name {v.name!r}")
            seen.add(v.name)
            roles.setdefault(v.role, []).append(v)
        if len(roles.get(ROLE_TREATMENT, [])) != 1:
            raise SchemaError("exactly one treatment variable is required")
        if len(roles.get(ROLE_OUTCOME, [])) != 1:
            raise SchemaError("exactly one outcome variable is required")
        if len(roles.get(ROLE_MEDIATOR, [])) > 1:
            raise SchemaError("at most one mediator variable is allowed")

        cov_names = [v.name for v in self.variables if v.role in COVARIATE_ROLES]
        cov_order = {name: i for i, name in enumerate(cov_names)}
        keys: set[tuple] = set()
        for fam in self.families:
            if fam.key in keys:
                raise SchemaError(f"duplicate family {fam.label}")
            keys.add(fam.key)
            if fam.with_mediator and not roles.get(ROLE_MEDIATOR):
                raise SchemaError(f"family {fam.label} uses an undeclared mediator")
            order = -1
            for name in fam.covariates:
                if name not in cov_order:
                    raise SchemaError(f"family {fam.label} conditions on unknown {name!r}")
                if cov_order[name] < order:
                    raise SchemaError(
                        f"family {fam.label} lists covariates out of declared order"
                    )
                order = cov_order[name]
            expected = self._family_shape(fam)
            if fam.table.shape != expected:
                raise SchemaError(
                    f"family {fam.label} table shape {fam.table.shape} != {expected}"
                )

    def _family_shape(self, fam: EvidenceFamily) -> tuple[int, ...]:
        shape: tuple[int, ...] = (self.treatment.cardinality, self.outcome.cardinality)
        if fam.with_mediator:
            shape += (self.mediator.cardinality,)  # type: ignore[union-attr]
        shape += tuple(self.covariate(name).cardinality for name in fam.covariates)
        return shape

    # -- variable lookups ---------------------------------------------------

    @property
    def treatment(self) -> VariableSpec:
        return next(v for v in self.variables if v.role == ROLE_TREATMENT)

    @property
    def outcome(self) -> VariableSpec:
        return next(v for v in self.variables if v.role == ROLE_OUTCOME)

    @property
    def mediator(self) -> VariableSpec | None:
        return next((v for v in self.variables if v.role == ROLE_MEDIATOR), None)

    @property
    def covariates(self) -> tuple[VariableSpec, ...]:
        return tuple(v for v in self.variables if v.role in COVARIATE_ROLES)

    def covariate(self, name: str) -> VariableSpec:
        for v in self.covariates:
            if v.name == name:
                return v
        raise SchemaError(f"unknown covariate {name!r}")

    @property
    def z_cards(self) -> tuple[int, ...]:
        return tuple(v.cardinality for v in self.covariates)

    # -- family lookups -----------------------------------------------------

    def find_family(
        self, kind: str, covariates: Sequence[str] = (), with_mediator: bool = False
    ) -> EvidenceFamily | None:
        key = (kind, tuple(covariates), with_mediator)
        for fam in self.families:
            if fam.key == key:
                return fam
        return None

    def observational_joint_xy(self) -> np.ndarray | None:
        """P(x, y) read from evidence, marginalizing the narrowest family."""
        fam = self.find_family(KIND_OBSERVATIONAL)
        if fam is not None:
            return np.asarray(fam.table)
        candidates = [f for f in self.families if f.kind == KIND_OBSERVATIONAL]
        if not candidates:
            return None
        candidates.sort(key=lambda f: (len(f.covariates), f.with_mediator, f.covariates))
        table = np.asarray(candidates[0].table)
        return table.sum(axis=tuple(range(2, table.ndim)))


def family_from_entries(
    evidence_variables: Sequence[VariableSpec], entries: Sequence[EvidenceEntry]
) -> EvidenceFamily:
    """Assemble one dense family from cell entries.

    All entries must share kind, conditioning covariates and mediator
    presence.  Duplicate cells and missing cells are hard errors: families
    are never implicitly completed.
    """
    if not entries:
        raise SchemaError("cannot build a family from zero entries")
    kind = entries[0].kind
    cov_names = tuple(name for name, _ in entries[0].z_values)
    with_mediator = entries[0].mediator_value is not None

    by_name = {v.name: v for v in evidence_variables}
    treatment = next(v for v in evidence_variables if v.role == ROLE_TREATMENT)
    outcome = next(v for v in evidence_variables if v.role == ROLE_OUTCOME)
    mediator = next((v for v in evidence_variables if v.role == ROLE_MEDIATOR), None)

    shape: tuple[int, ...] = (treatment.cardinality, outcome.cardinality)
    if with_mediator:
        if mediator is None:
            raise SchemaError("entries carry a mediator value but none is declared")
        shape += (mediator.cardinality,)
    for name in cov_names:
        if name not in by_name:
            raise SchemaError(f"entry conditions on unknown covariate {name!r}")
        shape += (by_name[name].cardinality,)

    table = np.full(shape, np.nan)
    for e in entries:
        if e.kind != kind:
            raise SchemaError("entries of mixed kinds in one family")
        if tuple(name for name, _ in e.z_values) != cov_names:
            raise SchemaError("entries with mixed conditioning patterns in one family")
        if (e.mediator_value is not None) != with_mediator:
            raise SchemaError("entries with mixed mediator presence in one family")
        idx: tuple[int, ...] = (e.treatment_value, e.outcome_value)
        if with_mediator:
            idx += (e.mediator_value,)  # type: ignore[operator]
        idx += tuple(v for _, v in e.z_values)
        try:
            current = table[idx]
        except IndexError as exc:
            raise SchemaError(f"entry cell {idx} out of range") from exc
        if not np.isnan(current):
            raise EvidenceError(f"duplicate cell {idx} in family {kind}{cov_names}")
        table[idx] = e.probability
    if np.isnan(table).any():
        missing = int(np.isnan(table).sum())
        raise EvidenceError(
            f"incomplete family {kind}{cov_names}: {missing} cell(s) missing "
            "(families are never implicitly completed)"
        )
    return EvidenceFamily(kind, cov_names, with_mediator, table)


# ---------------------------------------------------------------------------
# evidence validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationIssue:
    level: str  # "info" | "warning" | "error"
    families: tuple[str, ...]
    message: str
    residual: float


@dataclass
class ValidationReport:
    issues: list[ValidationIssue] = field(default_factory=list)

    @property
    def errors(self) -> list[ValidationIssue]:
        return [i for i in self.issues if i.level == "error"]

    @property
    def warnings(self) -> list[ValidationIssue]:
        return [i for i in self.issues if i.level == "warning"]

    @property
    def max_residual(self) -> float:
        return max((i.residual for i in self.issues), default=0.0)

    @property
    def ok(self) -> bool:
        return not self.errors


def _marginalize_to(
    fam: EvidenceFamily, covariates: Sequence[str], drop_mediator: bool
) -> np.ndarray:
    """Sum a family's table down to (x, y[, w], covariates-subset)."""
    table = np.asarray(fam.table)
    axes = []
    lead = 2 + int(fam.with_mediator)
    if fam.with_mediator and drop_mediator:
        axes.append(2)
    keep = set(covariates)
    for pos, name in enumerate(fam.covariates):
        if name not in keep:
            axes.append(lead + pos)
    return table.sum(axis=tuple(axes)) if axes else table


def validate_evidence(
    evidence: EvidenceSet, eps: float = EPS_EVIDENCE
) -> ValidationReport:
    """Check evidence for internal and mutual consistency.

    Per-family checks: finite entries, nonnegativity, and normalization
    (per-arm for experimental families, global for observational ones).
    Cross-family checks: families of the same kind must agree on their common
    marginal.  Residuals above ``eps`` raise :class:`EvidenceError`; smaller
    ones are recorded in the returned report.
    """
    report = ValidationReport()

    def note(level: str, fams: tuple[str, ...], msg: str, residual: float) -> None:
        report.issues.append(ValidationIssue(level, fams, msg, residual))

    def level_for(residual: float) -> str:
        if residual > eps:
            return "error"
        return "warning" if residual > EPS_NUM else "info"

    for fam in evidence.families:
        table = np.asarray(fam.table)
        if not np.isfinite(table).all():
            note("error", (fam.label,), "non-finite probability", float("inf"))
            continue
        neg = float(-table.min()) if table.size else 0.0
        if neg > 0:
            note(level_for(neg), (fam.label,), "negative probability", neg)
        if fam.kind == KIND_EXPERIMENTAL:
            arm_sums = table.reshape(table.shape[0], -1).sum(axis=1)
            residual = float(np.abs(arm_sums - 1.0).max())
            note(level_for(residual), (fam.label,), "per-arm normalization", residual)
        else:
            residual = float(abs(table.sum() - 1.0))
            note(level_for(residual), (fam.label,), "normalization", residual)

    fams = list(evidence.families)
    for i in range(len(fams)):
        for j in range(i + 1, len(fams)):
            a, b = fams[i], fams[j]
            if a.kind != b.kind:
                continue
            common = tuple(n for n in a.covariates if n in b.covariates)
            drop_w = a.with_mediator != b.with_mediator
            ma = _marginalize_to(a, common, drop_mediator=drop_w and a.with_mediator)
            mb = _marginalize_to(b, common, drop_mediator=drop_w and b.with_mediator)
            # Axis order within `common` agrees because family covariates
            # follow the declared variable order.
            residual = float(np.abs(ma - mb).max()) if ma.size else 0.0
            note(
                level_for(residual),
                (a.label, b.label),
                "cross-family marginal consistency",
                residual,
            )

    if not report.ok:
        worst = max(report.errors, key=lambda it: it.residual)
        raise EvidenceError(
            "inconsistent evidence: "
            + "; ".join(
                f"{it.message} in {' vs '.join(it.families)} (residual {it.residual:.3g})"
                for it in report.errors
            ),
            report,
        )
    return report


# ---------------------------------------------------------------------------
# queries and intervals
# ---------------------------------------------------------------------------

QUERY_PNS = "pns"
QUERY_PN = "pn"
QUERY_PS = "ps"


@dataclass(frozen=True)
class QuerySpec:
    """What to bound.

    ``pns`` with k arms asks for P(Y_{x_0} = outcomes[0], ..., Y_{x_{k-1}} =
    outcomes[k-1]); the default outcome pattern is (0, 1, ..., k-1) truncated
    or padded to k entries, matching the usual binary PNS with outcome 0 at
    arm 0 and outcome 1 at arm 1.  ``pn`` carries the factual event pair
    (x, y) and ``ps`` the complementary pair (x', y'); both require binary
    treatment and outcome.
    """

    kind: str = QUERY_PNS
    k: int = 2
    outcomes: tuple[int, ...] = ()
    event: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if self.kind not in (QUERY_PNS, QUERY_PN, QUERY_PS):
            raise SchemaError(f"unknown query kind {self.kind!r}")
        if self.kind == QUERY_PNS:
            if self.k < 1:
                raise SchemaError("pns queries need k >= 1")
            if self.outcomes and len(self.outcomes) != self.k:
                raise SchemaError("outcomes length must equal k")
        if self.event is not None and any(v not in (0, 1) for v in self.event):
            raise SchemaError("factual event values must be 0 or 1")

    def resolved_event(self) -> tuple[int, int]:
        """Factual (treatment, outcome) cell for pn/ps conditioning."""
        if self.event is not None:
            return self.event
        return (1, 1) if self.kind == QUERY_PS else (0, 0)

    def resolved_outcomes(self, outcome_card: int) -> tuple[int, ...]:
        if self.outcomes:
            outcomes = self.outcomes
        else:
            outcomes = tuple(min(t, outcome_card - 1) for t in range(self.k))
        for y in outcomes:
            if not 0 <= y < outcome_card:
                raise SchemaError(f"target outcome {y} out of range")
        return outcomes


@dataclass(frozen=True)
class BoundsInterval:
    """A closed interval [lb, ub] with a certification flag.

    ``certified`` means the interval is guaranteed to contain the target
    quantity (exact LP optima, or outer bounds from branch and bound).
    Heuristic inner intervals carry ``certified=False``.
    """

    lb: float
    ub: float
    certified: bool = True

    def __post_init__(self) -> None:
        if math.isnan(self.lb) or math.isnan(self.ub):
            raise ValueError("interval endpoints must not be NaN")
        if self.lb > self.ub + 1e-9:
            raise ValueError(f"empty interval [{self.lb}, {self.ub}]")

    @property
    def width(self) -> float:
        return self.ub - self.lb

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.lb - tol <= value <= self.ub + tol

    def clamped(self) -> "BoundsInterval":
        lo = min(max(self.lb, 0.0), 1.0)
        hi = min(max(self.ub, 0.0), 1.0)
        if lo > hi:  # tiny numerical inversions collapse to a point
            lo = hi = (lo + hi) / 2.0
        return BoundsInterval(lo, hi, self.certified)

    def intersect(self, other: "BoundsInterval") -> "BoundsInterval":
        lo, hi = max(self.lb, other.lb), min(self.ub, other.ub)
        if lo > hi:
            lo = hi = (lo + hi) / 2.0
        return BoundsInterval(lo, hi, self.certified and other.certified)
