"""Fill preview tables with sampled tuples and render them as JSON or Markdown."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from .discovery import Constraints, Preview, PreviewTable
from .errors import InfeasibleError
from .graph import AttributeCandidate, Direction, EntityGraph

EMPTY_CELL = "-"


@dataclass(frozen=True)
class Column:
    edge_type: str
    label: str
    direction: Direction
    score: float

    @property
    def header(self) -> str:
        # incoming columns are marked; a relationship can show up in both directions
        return f"← {self.label}" if self.direction is Direction.INCOMING else self.label


@dataclass(frozen=True)
class MaterializedTable:
    key_type: str
    key_label: str
    score: float
    columns: tuple[Column, ...]
    rows: tuple[tuple[str, tuple[tuple[str, ...], ...]], ...]

    @property
    def column_labels(self) -> list[str]:
        return [c.header for c in self.columns]


def materialize(g: EntityGraph, t: PreviewTable, sample_size: int, seed: int = 0) -> MaterializedTable:
    """Draw up to ``sample_size`` key entities and fill in their non-key values.

    Sampling is uniform without replacement using ``random.Random(seed)``
    (Mersenne Twister) over the key entities sorted by id, so a seed gives the
    same rows on every platform.  Rows are listed by key entity name.
    """
    if sample_size < 1:
        raise ValueError("sample_size must be positive")
    population = g.members.get(t.key, ())
    if not population:
        raise InfeasibleError(f"entity type {t.key!r} has no entities to show")
    picked = random.Random(seed).sample(population, min(sample_size, len(population)))
    columns = tuple(
        Column(c.edge_type, g.relationship_types[c.edge_type].label, c.direction, s)
        for c, s in zip(t.nonkeys, t.nonkey_scores)
    )
    rows = []
    for v in picked:
        cells = tuple(
            tuple(sorted(g.entities[u].name for u in g.neighbors(v, c.edge_type, c.direction)))
            for c in t.nonkeys
        )
        rows.append((g.entities[v].name, cells))
    rows.sort()
    return MaterializedTable(t.key, g.entity_types[t.key].label, t.score, columns, tuple(rows))


def materialize_preview(g: EntityGraph, p: Preview, sample_size: int, seed: int = 0) -> list[MaterializedTable]:
    # one sub-seed per table keeps each table's sample independent of the others
    return [materialize(g, t, sample_size, seed + i) for i, t in enumerate(p.tables)]


def sig6(x: float) -> float:
    return float(f"{x:.6g}")


def preview_to_dict(
    p: Preview,
    tables: Sequence[MaterializedTable],
    constraints: Constraints | None = None,
    measures: Mapping[str, str] | None = None,
) -> dict[str, Any]:
    if len(tables) != len(p.tables):
        raise ValueError("need exactly one materialized table per preview table")
    out: dict[str, Any] = {}
    if constraints is not None:
        out["constraints"] = {"k": constraints.k, "n": constraints.n}
        if constraints.d is not None:
            out["constraints"]["d"] = constraints.d
        out["constraints"]["mode"] = constraints.mode.value
    if measures is not None:
        out["measures"] = {"key": measures["key"], "nonkey": measures["nonkey"]}
    out["total_score"] = sig6(p.total_score)
    out["tables"] = [
        {
            "key_type": m.key_type,
            "key_label": m.key_label,
            "score": sig6(m.score),
            "columns": [
                {"edge_type": c.edge_type, "label": c.label, "direction": c.direction.value, "score": sig6(c.score)}
                for c in m.columns
            ],
            "rows": [{"key": key, "cells": [list(cell) for cell in cells]} for key, cells in m.rows],
        }
        for m in tables
    ]
    return out


def _md_cell(values: Sequence[str]) -> str:
    if not values:
        return EMPTY_CELL
    text = values[0] if len(values) == 1 else "{" + ", ".join(values) + "}"
    return text.replace("|", "\\|")


def render_markdown(p: Preview, tables: Sequence[MaterializedTable], constraints: Constraints | None = None) -> str:
    count = len(p.tables)
    head = f"Preview: {count} table{'s' if count != 1 else ''}, total score {sig6(p.total_score):g}"
    if constraints is not None:
        bound = f", d={constraints.d}" if constraints.d is not None else ""
        head += f" ({constraints.mode.value}, k={constraints.k}, n={constraints.n}{bound})"
    parts = [head]
    for m in tables:
        lines = [f"### {m.key_label} (score {sig6(m.score):g})", ""]
        header = [f"**{m.key_label}**", *m.column_labels]
        lines.append("| " + " | ".join(header) + " |")
        lines.append("|" + "---|" * len(header))
        for key, cells in m.rows:
            lines.append("| " + " | ".join([key, *(_md_cell(c) for c in cells)]) + " |")
        parts.append("\n".join(lines))
    return "\n\n".join(parts) + "\n"


def render(
    p: Preview,
    tables: Sequence[MaterializedTable],
    fmt: str = "json",
    *,
    constraints: Constraints | None = None,
    measures: Mapping[str, str] | None = None,
) -> str:
    if fmt == "json":
        return json.dumps(preview_to_dict(p, tables, constraints, measures), indent=2, ensure_ascii=False) + "\n"
    if fmt == "markdown":
        if len(tables) != len(p.tables):
            raise ValueError("need exactly one materialized table per preview table")
        return render_markdown(p, tables, constraints)
    raise ValueError(f"unknown format {fmt!r}")


def preview_from_json(text: str) -> Preview:
    """Rebuild the preview structure (keys, candidates, scores) from JSON output."""
    data = json.loads(text)
    tables = []
    for t in data["tables"]:
        nonkeys = tuple(
            AttributeCandidate(t["key_type"], c["edge_type"], Direction(c["direction"])) for c in t["columns"]
        )
        tables.append(PreviewTable(t["key_type"], nonkeys, tuple(c["score"] for c in t["columns"]), t["score"]))
    return Preview(tuple(tables), data["total_score"])
