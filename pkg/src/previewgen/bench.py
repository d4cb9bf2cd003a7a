"""Synthetic entity graphs and a wall-clock harness for the discovery solvers."""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import random
import sys
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .discovery import Constraints, Mode, apriori_discover, brute_force, dp_concise
from .errors import PreviewError, SolverTimeout
from .graph import Entity, EntityGraph, EntityType, RelationshipType, derive_schema_graph, format_entity_graph
from .scoring import ScoredSchema, build_scored_schema

log = logging.getLogger(__name__)

CSV_COLUMNS = ["K", "N", "k", "n", "d", "mode", "algorithm", "ms", "status", "estimated_ms"]


@dataclass(frozen=True)
class SyntheticSpec:
    """Shape of a random entity graph.

    ``skew`` biases which entity types receive relationship types and entities
    (type ``i`` is drawn with weight ``(i + 1) ** -skew``; 0 is uniform).
    """

    K: int
    N: int
    entities: int
    edges: int
    skew: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ValueError("need at least one entity type")
        if self.N < 0:
            raise ValueError("N must be non-negative")
        if self.entities < self.K:
            raise ValueError("every entity type needs an entity: entities >= K")
        if self.edges < self.N:
            raise ValueError("every relationship type needs an instance: edges >= N")
        if self.N == 0 and self.edges:
            raise ValueError("edges need relationship types")
        if self.skew < 0:
            raise ValueError("skew must be non-negative")


def generate_synthetic(spec: SyntheticSpec) -> EntityGraph:
    """Random entity graph whose schema has exactly ``K`` types and ``N`` relationship types."""
    rng = random.Random(spec.seed)
    width = max(2, len(str(spec.K - 1)))
    types = [EntityType(f"t{i:0{width}d}", f"Type {i}") for i in range(spec.K)]
    weights = [(i + 1) ** -spec.skew for i in range(spec.K)]

    # one entity per type first, the rest by popularity
    owner = list(range(spec.K)) + rng.choices(range(spec.K), weights, k=spec.entities - spec.K)
    ewidth = len(str(spec.entities - 1))
    entities = [Entity(f"e{j:0{ewidth}d}", f"entity {j}", frozenset({types[i].id})) for j, i in enumerate(owner)]
    members: list[list[str]] = [[] for _ in range(spec.K)]
    for en, i in zip(entities, owner):
        members[i].append(en.id)

    rwidth = len(str(max(spec.N - 1, 0)))
    rels = []
    for r in range(spec.N):
        src = rng.choices(range(spec.K), weights)[0]
        if spec.K > 1:
            dst = src
            while dst == src:
                dst = rng.choices(range(spec.K), weights)[0]
        else:
            dst = src
        rels.append(RelationshipType(f"r{r:0{rwidth}d}", f"rel {r}", types[src].id, types[dst].id))

    # one instance per relationship type, the rest with a heavy tail
    rel_weights = [(r + 1) ** -max(spec.skew, 0.5) for r in range(spec.N)]
    order = list(range(spec.N))
    rng.shuffle(order)
    picks = order + (rng.choices(order, rel_weights, k=spec.edges - spec.N) if spec.N else [])
    index = {t.id: i for i, t in enumerate(types)}
    edges = []
    for r in picks:
        rt = rels[r]
        edges.append(
            (rt.id, rng.choice(members[index[rt.source]]), rng.choice(members[index[rt.target]]))
        )
    return EntityGraph(types, rels, entities, edges)


Solver = Callable[[ScoredSchema, Constraints], object]


def _solvers(mode: Mode, time_limit: float | None) -> dict[str, Solver]:
    brute = lambda s, c: brute_force(s, c, time_limit=time_limit)  # noqa: E731
    if mode is Mode.CONCISE:
        return {"brute": brute, "dp": lambda s, c: dp_concise(s, c.k, c.n)}
    return {"brute": brute, "apriori": apriori_discover}


def time_solvers(
    g: EntityGraph,
    grid: Iterable[Constraints],
    repetitions: int = 3,
    *,
    time_limit: float | None = None,
    algorithms: Sequence[str] | None = None,
    scored: ScoredSchema | None = None,
) -> list[dict[str, object]]:
    """Average wall-clock milliseconds per solver and constraint setting.

    Runs are sequential.  A brute-force run stopped by ``time_limit`` is not
    repeated; its ``ms`` is the time spent before stopping (a lower bound,
    status ``timeout``) and ``estimated_ms`` extrapolates from the share of
    subsets examined.  Solver errors are recorded in ``status``.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be positive")
    schema = derive_schema_graph(g)
    if scored is None:
        scored = build_scored_schema(g, schema)
    rows = []
    for c in grid:
        for name, solve in _solvers(c.mode, time_limit).items():
            if algorithms is not None and name not in algorithms:
                continue
            row: dict[str, object] = {
                "K": len(schema.entity_types),
                "N": len(schema.relationship_types),
                "k": c.k,
                "n": c.n,
                "d": "" if c.d is None else c.d,
                "mode": c.mode.value,
                "algorithm": name,
                "status": "ok",
                "estimated_ms": "",
            }
            times = []
            for _ in range(repetitions):
                start = time.perf_counter()
                try:
                    solve(scored, c)
                except SolverTimeout as exc:
                    row["status"] = "timeout"
                    times = [exc.elapsed]
                    if exc.examined:
                        row["estimated_ms"] = round(exc.elapsed * exc.total / exc.examined * 1000, 3)
                    break
                except PreviewError as exc:
                    row["status"] = f"error: {exc}"
                    times = [time.perf_counter() - start]
                    break
                times.append(time.perf_counter() - start)
            row["ms"] = round(math.fsum(times) / len(times) * 1000, 3)
            log.info("%s %s k=%d n=%d d=%s: %s ms (%s)", name, c.mode.value, c.k, c.n, c.d, row["ms"], row["status"])
            rows.append(row)
    return rows


def timings_csv(rows: Iterable[dict[str, object]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


# Schema sized like the "music" domain (46 types, 133 relationship types).
MUSIC_SCALE = SyntheticSpec(K=46, N=133, entities=4000, edges=20000, skew=0.5, seed=7)


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="previewgen-bench", description="Time preview discovery solvers on a synthetic graph.")
    parser.add_argument("--types", "-K", type=int, default=MUSIC_SCALE.K)
    parser.add_argument("--rels", "-N", type=int, default=MUSIC_SCALE.N)
    parser.add_argument("--entities", type=int, default=MUSIC_SCALE.entities)
    parser.add_argument("--edges", type=int, default=MUSIC_SCALE.edges)
    parser.add_argument("--skew", type=float, default=MUSIC_SCALE.skew)
    parser.add_argument("--seed", type=int, default=MUSIC_SCALE.seed)
    parser.add_argument("-k", type=int, nargs="+", default=[5])
    parser.add_argument("-n", type=int, nargs="+", default=[10])
    parser.add_argument("-d", type=int, default=None)
    parser.add_argument("--mode", choices=[m.value for m in Mode], default="concise")
    parser.add_argument("--repetitions", type=int, default=3)
    parser.add_argument("--time-limit", type=float, default=60.0, help="seconds per brute-force run")
    parser.add_argument("--emit-graph", metavar="PATH", help="also write the synthetic graph in entity-graph format")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(message)s")

    spec = SyntheticSpec(args.types, args.rels, args.entities, args.edges, args.skew, args.seed)
    g = generate_synthetic(spec)
    if args.emit_graph:
        with open(args.emit_graph, "w", encoding="utf-8") as fh:
            fh.write(format_entity_graph(g))
    grid = [Constraints(k, n, Mode(args.mode), args.d) for k in args.k for n in args.n if n >= k]
    rows = time_solvers(g, grid, args.repetitions, time_limit=args.time_limit)
    sys.stdout.write(timings_csv(rows))
    return 0


if __name__ == "__main__":
    sys.exit(main())
