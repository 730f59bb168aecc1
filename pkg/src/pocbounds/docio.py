"""Problem and result documents, plus the delimited outputs of the lab.

Problem documents are JSON: declared variables, evidence families as dense
nested-list tables, a query, and solver options.  Floats are serialized with
Python's shortest round-trip decimal form (at most 17 significant digits),
so a document written and re-read reproduces the exact binary values.  The
CSV writers use the same float formatting for byte-stable outputs.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .model import (
    EvidenceFamily,
    EvidenceSet,
    QuerySpec,
    SchemaError,
    VariableSpec,
)

# ---------------------------------------------------------------------------
# problem documents
# ---------------------------------------------------------------------------


def query_to_dict(query: QuerySpec) -> dict[str, Any]:
    doc: dict[str, Any] = {"kind": query.kind, "k": query.k}
    if query.outcomes:
        doc["outcomes"] = list(query.outcomes)
    if query.event is not None:
        doc["event"] = list(query.event)
    return doc


def query_from_dict(doc: Any) -> QuerySpec:
    if not isinstance(doc, dict):
        raise SchemaError("query must be an object")
    try:
        outcomes = tuple(int(v) for v in doc.get("outcomes", ()))
        event_raw = doc.get("event")
        event = None if event_raw is None else (int(event_raw[0]), int(event_raw[1]))
        return QuerySpec(
            kind=str(doc.get("kind", "pns")),
            k=int(doc.get("k", 2)),
            outcomes=outcomes,
            event=event,
        )
    except (TypeError, ValueError, IndexError) as exc:
        raise SchemaError(f"bad query: {exc}") from exc


def problem_to_dict(
    evidence: EvidenceSet, query: QuerySpec, options: dict[str, Any] | None = None
) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "variables": [
            {"name": v.name, "role": v.role, "cardinality": v.cardinality}
            for v in evidence.variables
        ],
        "query": query_to_dict(query),
        "evidence": [
            {
                "kind": f.kind,
                "covariates": list(f.covariates),
                "with_mediator": f.with_mediator,
                "table": f.table.tolist(),
            }
            for f in evidence.families
        ],
    }
    if options:
        doc["options"] = dict(options)
    return doc


def problem_from_dict(doc: Any) -> tuple[EvidenceSet, QuerySpec, dict[str, Any]]:
    """Parse a problem document; malformed structure raises SchemaError."""
    if not isinstance(doc, dict):
        raise SchemaError("problem document must be a JSON object")
    for key in ("variables", "evidence"):
        if key not in doc:
            raise SchemaError(f"problem document missing {key!r}")
    try:
        variables = tuple(
            VariableSpec(str(v["name"]), str(v["role"]), int(v["cardinality"]))
            for v in doc["variables"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad variable declaration: {exc}") from exc
    families = []
    for fam in doc["evidence"]:
        if not isinstance(fam, dict) or "kind" not in fam or "table" not in fam:
            raise SchemaError("each evidence family needs at least kind and table")
        try:
            table = np.asarray(fam["table"], dtype=float)
        except ValueError as exc:
            raise SchemaError(f"family table is not numeric: {exc}") from exc
        families.append(
            EvidenceFamily(
                kind=str(fam["kind"]),
                covariates=tuple(str(n) for n in fam.get("covariates", ())),
                with_mediator=bool(fam.get("with_mediator", False)),
                table=table,
            )
        )
    evidence = EvidenceSet(variables, tuple(families))
    query = query_from_dict(doc.get("query", {}))
    options = doc.get("options", {})
    if options is None:
        options = {}
    if not isinstance(options, dict):
        raise SchemaError("options must be an object")
    return evidence, query, options


def load_problem(path: str | Path) -> tuple[EvidenceSet, QuerySpec, dict[str, Any]]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read problem document: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"problem document is not valid JSON: {exc}") from exc
    return problem_from_dict(doc)


def save_document(path: str | Path, doc: dict[str, Any]) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


# ---------------------------------------------------------------------------
# delimited outputs
# ---------------------------------------------------------------------------


def format_value(value: Any) -> str:
    """Stable cell formatting: ints plain, floats shortest round-trip."""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(path: str | Path, header: list[str], rows: list[list[Any]]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_summary_csv(path: str | Path, names: tuple[str, ...], stats: dict[str, Any]) -> None:
    write_csv(path, ["statistic", "value"], [[name, stats[name]] for name in names])


def write_plot_csv(path: str | Path, series: dict[str, np.ndarray]) -> None:
    header = ["rank", "tp", "mlp", "proposed"]
    rows = [
        [int(series["rank"][i]), series["tp"][i], series["mlp"][i], series["prop"][i]]
        for i in range(len(series["rank"]))
    ]
    write_csv(path, header, rows)
