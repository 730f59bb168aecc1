"""Certified bounds on probabilities of causation from partial causal knowledge."""

from .closed_form import BinaryEvidence, tp_pn_bounds, tp_pns_bounds, tp_ps_bounds
from .docio import (
    load_problem,
    problem_from_dict,
    problem_to_dict,
    query_from_dict,
    query_to_dict,
    save_document,
)
from .model import (
    BoundsInterval,
    CounterfactualSpace,
    EvidenceEntry,
    EvidenceError,
    EvidenceFamily,
    EvidenceSet,
    QuerySpec,
    SchemaError,
    ValidationReport,
    VariableSpec,
    family_from_entries,
    mediator_space,
    outcome_space,
    validate_evidence,
)
from .programs import (
    BilinearConstraint,
    ConstraintProgram,
    LinearConstraint,
    bilinear_structure,
    build_covariate_specific_program,
    build_mediator_program,
    build_nondescendant_program,
    mccormick_relax,
    objective_for_query,
)
from .scmlab import (
    GroundTruth,
    ScmSpec,
    TrialRecord,
    TrialSettings,
    marginal_bounds,
    proposed_bounds,
    run_trial,
    run_trials,
    sample_scm,
    scm_to_evidence,
    single_covariate_bounds,
    sorted_plot_series,
    summarize,
)
from .solver import (
    InfeasibleProgramError,
    IntervalResult,
    SolveReport,
    bb_solve,
    local_search_inner,
    solve_lp,
    solve_query_interval,
    tighten_aggregate_boxes,
)

__version__ = "0.1.0"

__all__ = [
    "BinaryEvidence",
    "BilinearConstraint",
    "BoundsInterval",
    "ConstraintProgram",
    "CounterfactualSpace",
    "EvidenceEntry",
    "EvidenceError",
    "EvidenceFamily",
    "EvidenceSet",
    "GroundTruth",
    "InfeasibleProgramError",
    "IntervalResult",
    "LinearConstraint",
    "QuerySpec",
    "SchemaError",
    "ScmSpec",
    "SolveReport",
    "TrialRecord",
    "TrialSettings",
    "ValidationReport",
    "VariableSpec",
    "bb_solve",
    "bilinear_structure",
    "build_covariate_specific_program",
    "build_mediator_program",
    "build_nondescendant_program",
    "family_from_entries",
    "load_problem",
    "local_search_inner",
    "marginal_bounds",
    "mccormick_relax",
    "mediator_space",
    "objective_for_query",
    "outcome_space",
    "problem_from_dict",
    "problem_to_dict",
    "proposed_bounds",
    "query_from_dict",
    "query_to_dict",
    "run_trial",
    "run_trials",
    "sample_scm",
    "save_document",
    "scm_to_evidence",
    "single_covariate_bounds",
    "solve_lp",
    "solve_query_interval",
    "sorted_plot_series",
    "summarize",
    "tighten_aggregate_boxes",
    "tp_pn_bounds",
    "tp_pns_bounds",
    "tp_ps_bounds",
    "validate_evidence",
    "__version__",
]
