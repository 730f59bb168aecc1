"""Simulation lab: ground-truth SCMs, exact evidence emission, bound sweeps.

Ground truth is represented with response functions.  For the
covariate-adjusted case the distribution over response functions r: X -> Y
per covariate cell *is* the distribution over potential-outcome vectors, so
the sampled model doubles as the certificate of the true query value.  The
mediated case composes a response distribution for W given X with one for Y
given W, both per covariate cell, which makes every independence the
mediator program exploits hold by construction.

All evidence tables are exact marginals of the sampled joint (no sampling
noise), so residual audits against emitted families must come back at
machine precision.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import (
    KIND_EXPERIMENTAL,
    KIND_OBSERVATIONAL,
    QUERY_PNS,
    BoundsInterval,
    CounterfactualSpace,
    EvidenceFamily,
    EvidenceSet,
    QuerySpec,
    SchemaError,
    VariableSpec,
    mediator_space,
    outcome_space,
)
from .programs import (
    build_covariate_specific_program,
    build_mediator_program,
    build_nondescendant_program,
)
from .solver import IntervalResult, solve_query_interval

SCM_NONDESC = "nondescendant"
SCM_MEDIATOR = "mediator"

AVAIL_JOINT = "joint"
AVAIL_COVARIATE = "covariate_specific"
AVAIL_MARGINAL = "marginal_only"
AVAILABILITIES = (AVAIL_JOINT, AVAIL_COVARIATE, AVAIL_MARGINAL)

_EVENT_FLOOR = 1e-6  # minimum factual-cell mass for pn/ps trials
_IMPROVE_TOL = 1e-9  # strict improvement indicator


@dataclass(frozen=True)
class ScmSpec:
    """Shape of the ground-truth models to sample."""

    kind: str = SCM_NONDESC
    n_covariates: int = 1
    z_card: int = 2
    n_arms: int = 2
    outcome_card: int = 2
    w_card: int = 2
    availability: str = AVAIL_COVARIATE

    def __post_init__(self) -> None:
        if self.kind not in (SCM_NONDESC, SCM_MEDIATOR):
            raise SchemaError(f"unknown scm kind {self.kind!r}")
        if self.availability not in AVAILABILITIES:
            raise SchemaError(f"unknown availability {self.availability!r}")
        if self.kind == SCM_MEDIATOR and self.n_covariates < 0:
            raise SchemaError("mediator models need n_covariates >= 0")

    @property
    def z_cards(self) -> tuple[int, ...]:
        return (self.z_card,) * self.n_covariates

    def variables(self) -> tuple[VariableSpec, ...]:
        out = [
            VariableSpec("X", "treatment", self.n_arms),
            VariableSpec("Y", "outcome", self.outcome_card),
        ]
        if self.kind == SCM_MEDIATOR:
            out.append(VariableSpec("W", "mediator", self.w_card))
        role = "backdoor_covariate" if self.kind == SCM_MEDIATOR else "nondescendant_covariate"
        for i in range(self.n_covariates):
            out.append(VariableSpec(f"Z{i + 1}", role, self.z_card))
        return tuple(out)

    def space(self) -> CounterfactualSpace:
        if self.kind == SCM_MEDIATOR:
            return mediator_space(self.n_arms, self.outcome_card, self.w_card, self.z_cards)
        return outcome_space(self.n_arms, self.outcome_card, self.z_cards)


@dataclass(frozen=True)
class GroundTruth:
    """One sampled model: components plus the induced counterfactual joint."""

    spec: ScmSpec
    space: CounterfactualSpace
    joint: np.ndarray  # flat, length space.total_size

    def __post_init__(self) -> None:
        self.joint.setflags(write=False)

    def query_value(self, query: QuerySpec) -> float:
        """Exact value of the query under this model."""
        space = self.space
        if query.kind == QUERY_PNS:
            outcomes = query.resolved_outcomes(space.outcome_card)
            fixed = {space.y_axis(t): outcomes[t] for t in range(query.k)}
            return float(self.joint[space.offsets_where(fixed)].sum())
        x_val, y_val = query.resolved_event()
        numer = {
            space.y_axis(x_val): y_val,
            space.y_axis(1 - x_val): 1 - y_val,
            space.x_axis: x_val,
        }
        denom = {space.y_axis(x_val): y_val, space.x_axis: x_val}
        den = float(self.joint[space.offsets_where(denom)].sum())
        if den <= 0.0:
            raise ZeroDivisionError("factual event has zero mass")
        return float(self.joint[space.offsets_where(numer)].sum()) / den

    def event_mass(self, query: QuerySpec) -> float:
        """Mass of the factual cell a pn/ps query conditions on (1.0 for pns)."""
        if query.kind == QUERY_PNS:
            return 1.0
        space = self.space
        x_val, y_val = query.resolved_event()
        fixed = {space.y_axis(x_val): y_val, space.x_axis: x_val}
        return float(self.joint[space.offsets_where(fixed)].sum())


def _dirichlet_rows(rng: np.random.Generator, n_rows: int, k: int) -> np.ndarray:
    return rng.dirichlet(np.ones(k), size=n_rows)


def compose_mediator_joint(
    space: CounterfactualSpace,
    z_shape: tuple[int, ...],
    pz: np.ndarray,
    px_z: np.ndarray,
    pfw_z: np.ndarray,
    pfy_z: np.ndarray,
) -> np.ndarray:
    """Counterfactual joint induced by per-cell response components.

    ``pfw_z[zi]`` is a distribution over functions arm -> mediator value and
    ``pfy_z[zi]`` over functions mediator value -> outcome; the two are
    composed independently per covariate cell, which bakes in every
    independence the mediator program assumes.  Returns the flat joint.
    """
    n_arms = space.n_arms
    w_card = space.w_card or 0
    fw_shape = (w_card,) * n_arms
    fy_shape = (space.outcome_card,) * w_card
    joint = np.zeros(space.axis_sizes)
    for zi in range(pz.shape[0]):
        z_cell = np.unravel_index(zi, z_shape) if z_shape else ()
        for wi in range(pfw_z.shape[1]):
            w_vec = np.unravel_index(wi, fw_shape)
            for yi in range(pfy_z.shape[1]):
                y_of_w = np.unravel_index(yi, fy_shape)
                y_vec = tuple(y_of_w[w_vec[t]] for t in range(n_arms))
                mass = pfw_z[zi, wi] * pfy_z[zi, yi]
                if mass == 0.0:
                    continue
                for x in range(n_arms):
                    cell = (*y_vec, *w_vec, *z_cell, w_vec[x], x)
                    joint[cell] += pz[zi] * mass * px_z[zi, x]
    return joint.reshape(-1)


def sample_scm(spec: ScmSpec, rng: np.random.Generator) -> GroundTruth:
    """Draw one ground-truth model with flat Dirichlet component rows.

    Draw order is fixed (covariate cell distribution, then per-cell response
    rows, then per-cell treatment rows) so a given generator state always
    yields the same model.
    """
    space = spec.space()
    n_z = int(np.prod(spec.z_cards)) if spec.n_covariates else 1
    z_shape = spec.z_cards if spec.n_covariates else ()
    pz = rng.dirichlet(np.ones(n_z)) if n_z > 1 else np.ones(1)
    joint = np.zeros(space.axis_sizes)

    if spec.kind == SCM_NONDESC:
        n_resp = spec.outcome_card ** spec.n_arms
        resp = _dirichlet_rows(rng, n_z, n_resp)  # rows: P(r | z)
        px = _dirichlet_rows(rng, n_z, spec.n_arms)  # rows: P(x | z)
        resp_shape = (spec.outcome_card,) * spec.n_arms
        for zi in range(n_z):
            z_cell = np.unravel_index(zi, z_shape) if z_shape else ()
            for ri in range(n_resp):
                y_vec = np.unravel_index(ri, resp_shape)
                for x in range(spec.n_arms):
                    joint[(*y_vec, *z_cell, x)] = pz[zi] * resp[zi, ri] * px[zi, x]
    else:
        n_fw = spec.w_card ** spec.n_arms
        n_fy = spec.outcome_card ** spec.w_card
        fw = _dirichlet_rows(rng, n_z, n_fw)  # rows: P(fW | z), fW: arm -> w
        fy = _dirichlet_rows(rng, n_z, n_fy)  # rows: P(fY | z), fY: w -> y
        px = _dirichlet_rows(rng, n_z, spec.n_arms)
        return GroundTruth(
            spec, space, compose_mediator_joint(space, z_shape, pz, px, fw, fy)
        )
    return GroundTruth(spec, space, joint.reshape(-1))


def covariate_subsets(names: tuple[str, ...], availability: str) -> list[tuple[str, ...]]:
    """Which covariate conditioning patterns a given availability emits."""
    if availability == AVAIL_MARGINAL:
        return [()]
    if availability == AVAIL_COVARIATE:
        return [()] + [(n,) for n in names]
    subsets: list[tuple[str, ...]] = []
    for r in range(len(names) + 1):
        subsets.extend(itertools.combinations(names, r))
    return subsets


def _family_table(
    gt: GroundTruth,
    kind: str,
    subset: tuple[str, ...],
    with_mediator: bool,
    cov_names: tuple[str, ...],
) -> np.ndarray:
    """Exact family table by summing the flat joint over matching cells."""
    space = gt.space
    spec = gt.spec
    axes_of = {name: space.z_axis(i) for i, name in enumerate(cov_names)}
    cards = [spec.z_card] * len(subset)
    shape: list[int] = [spec.n_arms, spec.outcome_card]
    if with_mediator:
        shape.append(spec.w_card)
    shape.extend(cards)
    table = np.zeros(tuple(shape))
    for t in range(spec.n_arms):
        for s in range(spec.outcome_card):
            for z_cell in itertools.product(*(range(c) for c in cards)):
                fixed = {space.y_axis(t): s}
                fixed.update({axes_of[n]: v for n, v in zip(subset, z_cell)})
                if kind == KIND_OBSERVATIONAL:
                    fixed[space.x_axis] = t
                if with_mediator:
                    for u in range(spec.w_card):
                        cell = dict(fixed)
                        cell[space.w_actual_axis] = u
                        table[(t, s, u) + z_cell] = gt.joint[space.offsets_where(cell)].sum()
                else:
                    table[(t, s) + z_cell] = gt.joint[space.offsets_where(fixed)].sum()
    return table


def scm_to_evidence(gt: GroundTruth) -> EvidenceSet:
    """Emit every family the model's availability level grants.

    Mediated models emit, per conditioning pattern, the experimental family
    and both observational variants (with and without the mediator); the
    without-mediator tables are redundant given the with-mediator ones but
    are what the baseline routes consume.
    """
    spec = gt.spec
    variables = spec.variables()
    cov_names = tuple(v.name for v in variables if v.role.endswith("_covariate"))
    subsets = covariate_subsets(cov_names, spec.availability)
    families: list[EvidenceFamily] = []
    for subset in subsets:
        families.append(
            EvidenceFamily(
                KIND_EXPERIMENTAL,
                subset,
                False,
                _family_table(gt, KIND_EXPERIMENTAL, subset, False, cov_names),
            )
        )
    if spec.kind == SCM_MEDIATOR:
        for subset in subsets:
            families.append(
                EvidenceFamily(
                    KIND_OBSERVATIONAL,
                    subset,
                    True,
                    _family_table(gt, KIND_OBSERVATIONAL, subset, True, cov_names),
                )
            )
    for subset in subsets:
        families.append(
            EvidenceFamily(
                KIND_OBSERVATIONAL,
                subset,
                False,
                _family_table(gt, KIND_OBSERVATIONAL, subset, False, cov_names),
            )
        )
    return EvidenceSet(variables, tuple(families))


def mediator_vertex_starts(
    evidence: EvidenceSet, objective: np.ndarray, space: CounterfactualSpace
) -> tuple[np.ndarray, ...]:
    """Feasible counterfactual joints built from identified conditionals.

    When the evidence pins P(w | x, z) and P(y | w, z) (full observational
    family with the mediator) and the outcome is conditionally independent of
    the treatment given mediator and covariates, every coupling of those
    conditionals composes into a point satisfying all program constraints.
    The couplings with extreme mass on the diagonal (per covariate cell, per
    stage) are enumerated and combined greedily against the objective; points
    that do not actually satisfy the program get rejected downstream, so this
    is safe on evidence without the structure.  Binary variables only;
    returns () when not applicable.
    """
    med = evidence.mediator
    if (
        med is None
        or med.cardinality != 2
        or evidence.treatment.cardinality != 2
        or evidence.outcome.cardinality != 2
    ):
        return ()
    cov_names = tuple(v.name for v in evidence.covariates)
    fam = evidence.find_family(KIND_OBSERVATIONAL, cov_names, with_mediator=True)
    if fam is None:
        return ()
    table = np.asarray(fam.table)  # (x, y, w, *z)
    z_shape = table.shape[3:]
    n_z = int(np.prod(z_shape)) if z_shape else 1
    flat = table.reshape(2, 2, 2, n_z)
    pz = flat.sum(axis=(0, 1, 2))
    # Per covariate cell: 4 coupling vertices (low/high diagonal at each stage).
    blocks: list[list[np.ndarray]] = []
    for zi in range(n_z):
        tz = flat[:, :, :, zi]
        if pz[zi] <= 0.0:
            blocks.append([np.zeros(space.total_size)] * 4)
            continue
        tz = tz / pz[zi]
        px = tz.sum(axis=(1, 2))
        pw_x = tz.sum(axis=1)  # (x, w) joint given z
        pwz = tz.sum(axis=(0, 1))
        if px.min() <= 0.0 or pwz.min() <= 0.0:
            return ()
        w0, w1 = pw_x[0, 0] / px[0], pw_x[1, 0] / px[1]  # P(w=0 | x, z)
        py_w = tz.sum(axis=0) / pwz[None, :]  # (y, w)
        y0, y1 = py_w[0, 0], py_w[0, 1]  # P(y=0 | w, z)
        q_ends = (max(0.0, w0 + w1 - 1.0), min(w0, w1))
        r_ends = (max(0.0, y0 + y1 - 1.0), min(y0, y1))
        cell_blocks = []
        for q in q_ends:
            pfw = np.array([q, w0 - q, w1 - q, 1.0 - w0 - w1 + q]).clip(min=0.0)
            for r in r_ends:
                pfy = np.array([r, y0 - r, y1 - r, 1.0 - y0 - y1 + r]).clip(min=0.0)
                block = compose_mediator_joint(
                    space,
                    z_shape,
                    np.eye(n_z)[zi] * pz[zi],
                    np.tile(px, (n_z, 1)),
                    np.tile(pfw, (n_z, 1)),
                    np.tile(pfy, (n_z, 1)),
                )
                cell_blocks.append(block)
        blocks.append(cell_blocks)
    obj_mass = [[b[objective].sum() for b in cell] for cell in blocks]
    starts = []
    for pick in ("max", "min"):
        fn = np.argmax if pick == "max" else np.argmin
        choice = [int(fn(np.array(obj_mass[zi]))) for zi in range(n_z)]
        starts.append(sum(blocks[zi][choice[zi]] for zi in range(n_z)))
    for v in range(4):  # uniform vertex choices, deduplicated by bytes
        starts.append(sum(blocks[zi][v] for zi in range(n_z)))
    unique: dict[bytes, np.ndarray] = {}
    for s in starts:
        unique.setdefault(s.tobytes(), s)
    return tuple(unique.values())


# ---------------------------------------------------------------------------
# baseline and proposed routes
# ---------------------------------------------------------------------------

def evidence_subset(
    evidence: EvidenceSet,
    allowed_covariates: tuple[str, ...],
    include_mediator: bool = False,
) -> EvidenceSet:
    """Restrict to families conditioning only on the allowed covariates."""
    allowed = set(allowed_covariates)
    families = tuple(
        f
        for f in evidence.families
        if set(f.covariates) <= allowed and (include_mediator or not f.with_mediator)
    )
    return EvidenceSet(evidence.variables, families)


def marginal_bounds(evidence: EvidenceSet, query: QuerySpec) -> BoundsInterval:
    """Bounds from experimental and observational marginals alone."""
    reduced = evidence_subset(evidence, ())
    program = build_covariate_specific_program(reduced, query)
    return solve_query_interval(program).interval


def single_covariate_bounds(
    evidence: EvidenceSet, query: QuerySpec
) -> tuple[BoundsInterval, dict[str, BoundsInterval]]:
    """Best-single-covariate baseline: intersect per-covariate intervals.

    Each covariate gets its own program over the marginal families plus the
    families conditioning on that covariate only; the baseline interval is
    the intersection (which still contains the query for every model
    consistent with the evidence).  With no covariate families at all this
    degenerates to the marginal bounds.
    """
    names = tuple(v.name for v in evidence.covariates)
    per: dict[str, BoundsInterval] = {}
    lb, ub = 0.0, 1.0
    for name in names:
        reduced = evidence_subset(evidence, (name,))
        if all(not f.covariates for f in reduced.families):
            continue  # nothing conditions on this covariate
        interval = solve_query_interval(
            build_covariate_specific_program(reduced, query)
        ).interval
        per[name] = interval
        lb = max(lb, interval.lb)
        ub = min(ub, interval.ub)
    if not per:
        interval = marginal_bounds(evidence, query)
        return interval, {}
    if lb > ub:  # numerically touching intervals
        lb = ub = 0.5 * (lb + ub)
    return BoundsInterval(lb, ub), per


def proposed_bounds(
    evidence: EvidenceSet,
    query: QuerySpec,
    budget: int = 2000,
    gap_tol: float = 1e-3,
    stall_rounds: int | None = 20,
    seed: int = 0,
    inner_restarts: int = 2,
) -> IntervalResult:
    """Certified bounds from the full evidence set (auto-selects the program)."""
    if any(f.with_mediator for f in evidence.families):
        # The consistency rows (observed mediator equals its potential value
        # under the treatment actually received) hold in every structural
        # model, so the truth stays feasible and the bounds stay certified.
        # Without them the mediated program provably collapses to the best
        # single-covariate baseline: any feasible point of that baseline
        # extends to the full program by copying each potential outcome onto
        # the matching potential mediator, which satisfies both independence
        # families identically.
        program = build_mediator_program(
            evidence, query, mediator_consistency_rows=True
        )
        starts = mediator_vertex_starts(evidence, program.objective, program.space)
        return solve_query_interval(
            program,
            budget=budget,
            gap_tol=gap_tol,
            stall_rounds=stall_rounds,
            seed=seed,
            inner_restarts=inner_restarts,
            inner_starts=starts,
        )
    program = build_nondescendant_program(evidence, query)
    return solve_query_interval(program)


# ---------------------------------------------------------------------------
# trial sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialSettings:
    scm: ScmSpec
    query: QuerySpec = field(default_factory=QuerySpec)
    n_trials: int = 100
    seed: int = 0
    budget: int = 2000
    gap_tol: float = 1e-3
    stall_rounds: int | None = 20
    inner_restarts: int = 2


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    tp_lb: float
    tp_ub: float
    mlp_lb: float
    mlp_ub: float
    prop_lb: float
    prop_ub: float
    truth: float
    nodes: int
    work: int  # deterministic effort proxy: total simplex pivots
    resamples: int = 0
    wall_ms: float = 0.0  # real time; never written to disk

    COLUMNS = ("trial", "tp_lb", "tp_ub", "mlp_lb", "mlp_ub",
               "prop_lb", "prop_ub", "truth", "nodes", "runtime_ms")

    def row(self) -> tuple:
        """Values for the trials table; runtime_ms carries the work proxy."""
        return (self.trial, self.tp_lb, self.tp_ub, self.mlp_lb, self.mlp_ub,
                self.prop_lb, self.prop_ub, self.truth, self.nodes, self.work)


def run_trial(settings: TrialSettings, index: int) -> TrialRecord:
    """One end-to-end trial: sample, emit evidence, bound three ways."""
    rng = np.random.default_rng(np.random.SeedSequence((settings.seed, index)))
    resamples = 0
    while True:
        gt = sample_scm(settings.scm, rng)
        if gt.event_mass(settings.query) > _EVENT_FLOOR:
            break
        resamples += 1
        if resamples > 1000:
            raise RuntimeError("factual event kept degenerating; check the query")
    evidence = scm_to_evidence(gt)
    truth = gt.query_value(settings.query)
    tp = marginal_bounds(evidence, settings.query)
    mlp, _ = single_covariate_bounds(evidence, settings.query)
    prop = proposed_bounds(
        evidence,
        settings.query,
        budget=settings.budget,
        gap_tol=settings.gap_tol,
        stall_rounds=settings.stall_rounds,
        seed=settings.seed,
        inner_restarts=settings.inner_restarts,
    )
    return TrialRecord(
        trial=index,
        tp_lb=tp.lb,
        tp_ub=tp.ub,
        mlp_lb=mlp.lb,
        mlp_ub=mlp.ub,
        prop_lb=prop.interval.lb,
        prop_ub=prop.interval.ub,
        truth=truth,
        nodes=prop.nodes_explored,
        work=prop.lp_pivots,
        resamples=resamples,
        wall_ms=prop.runtime_ms,
    )


def _worker(args: tuple[TrialSettings, int]) -> TrialRecord:
    return run_trial(*args)


def run_trials(settings: TrialSettings, jobs: int = 1) -> list[TrialRecord]:
    """Run the sweep; output is independent of ``jobs`` (per-trial seeding)."""
    indices = range(settings.n_trials)
    if jobs <= 1:
        return [run_trial(settings, i) for i in indices]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_worker, [(settings, i) for i in indices], chunksize=4))


SUMMARY_STATS = (
    "avg_tp_lb_gain",
    "avg_tp_ub_drop",
    "avg_mlp_lb_gain",
    "avg_mlp_ub_drop",
    "avg_gap_tp",
    "avg_gap_mlp",
    "avg_gap_proposed",
    "count_improved_tp",
    "count_improved_mlp",
)


def summarize(records: list[TrialRecord]) -> dict[str, float]:
    """Aggregate sweep statistics (means of per-trial improvements and gaps).

    A trial counts as improved over a baseline when its proposed interval is
    strictly inside on either end (beyond a fixed tolerance).
    """
    if not records:
        raise ValueError("no records to summarize")
    arr = {
        name: np.array([getattr(r, name) for r in records])
        for name in ("tp_lb", "tp_ub", "mlp_lb", "mlp_ub", "prop_lb", "prop_ub")
    }
    improved_tp = np.logical_or(
        arr["prop_lb"] > arr["tp_lb"] + _IMPROVE_TOL,
        arr["prop_ub"] < arr["tp_ub"] - _IMPROVE_TOL,
    )
    improved_mlp = np.logical_or(
        arr["prop_lb"] > arr["mlp_lb"] + _IMPROVE_TOL,
        arr["prop_ub"] < arr["mlp_ub"] - _IMPROVE_TOL,
    )
    return {
        "avg_tp_lb_gain": float(np.mean(arr["prop_lb"] - arr["tp_lb"])),
        "avg_tp_ub_drop": float(np.mean(arr["tp_ub"] - arr["prop_ub"])),
        "avg_mlp_lb_gain": float(np.mean(arr["prop_lb"] - arr["mlp_lb"])),
        "avg_mlp_ub_drop": float(np.mean(arr["mlp_ub"] - arr["prop_ub"])),
        "avg_gap_tp": float(np.mean(arr["tp_ub"] - arr["tp_lb"])),
        "avg_gap_mlp": float(np.mean(arr["mlp_ub"] - arr["mlp_lb"])),
        "avg_gap_proposed": float(np.mean(arr["prop_ub"] - arr["prop_lb"])),
        "count_improved_tp": int(improved_tp.sum()),
        "count_improved_mlp": int(improved_mlp.sum()),
    }


def sorted_plot_series(
    records: list[TrialRecord], side: str, sample: int | None = None, seed: int = 0
) -> dict[str, np.ndarray]:
    """Monotone per-method bound curves for plotting.

    Uniformly subsamples ``sample`` records (all of them when None), then
    sorts each method's bounds independently (ascending).  ``side`` is "lb"
    or "ub".  Per-record dominance survives the independent sorts, so the
    curves keep the nesting order pointwise.
    """
    if side not in ("lb", "ub"):
        raise ValueError("side must be 'lb' or 'ub'")
    n = len(records)
    if n == 0:
        raise ValueError("no records to plot")
    if sample is None:
        sample = n
    if not 1 <= sample <= n:
        raise ValueError(f"sample must be in [1, {n}], got {sample}")
    if sample < n:
        rng = np.random.default_rng(np.random.SeedSequence((seed, 9973)))
        chosen = rng.choice(n, size=sample, replace=False)
    else:
        chosen = np.arange(n)
    out: dict[str, np.ndarray] = {"rank": np.arange(1, sample + 1)}
    for method in ("tp", "mlp", "prop"):
        values = np.array([getattr(r, f"{method}_{side}") for r in records])[chosen]
        out[method] = np.sort(values)
    return out
