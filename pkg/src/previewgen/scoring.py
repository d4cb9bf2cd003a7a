"""Key and non-key attribute scoring.

Key attributes (entity types) are scored by coverage or by a random walk over
the weighted schema graph; non-key attributes (relationship types seen from a
key type) by coverage or by the entropy of the value sets they induce.  Table
and preview scores combine them: a table scores ``key * sum(non-keys)`` and a
preview sums its tables.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConvergenceError, PreviewError, UnknownIdError
from .graph import (
    AttributeCandidate,
    DistanceIndex,
    EntityGraph,
    SchemaGraph,
    all_pairs_distance,
    incident_candidates,
)


class KeyMeasure(str, enum.Enum):
    COVERAGE = "coverage"
    RANDOM_WALK = "randomwalk"


class NonKeyMeasure(str, enum.Enum):
    COVERAGE = "coverage"
    ENTROPY = "entropy"


@dataclass(frozen=True)
class RandomWalkConfig:
    teleport: float = 1e-5
    tolerance: float = 1e-9
    max_iterations: int = 10_000

    def __post_init__(self) -> None:
        if not 0 < self.teleport < 1:
            raise ValueError(f"teleport must lie in (0, 1), got {self.teleport}")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")


# ---------------------------------------------------------------- key scores


def score_key_coverage(g: EntityGraph, type_id: str) -> int:
    if type_id not in g.entity_types:
        raise UnknownIdError(f"unknown entity type {type_id!r}")
    return len(g.members[type_id])


def transition_matrix(s: SchemaGraph) -> tuple[list[str], np.ndarray]:
    """Row-stochastic walk matrix before teleport, rows/cols in type-id order.

    Rows of isolated types are all zero here.
    """
    ids = s.type_ids
    index = {t: i for i, t in enumerate(ids)}
    w = np.zeros((len(ids), len(ids)))
    for (a, b), count in s.weights.items():
        w[index[a], index[b]] = count
        w[index[b], index[a]] = count
    totals = w.sum(axis=1, keepdims=True)
    m = np.divide(w, totals, out=np.zeros_like(w), where=totals > 0)
    return ids, m


def teleport_matrix(m: np.ndarray, teleport: float) -> np.ndarray:
    """Add ``teleport`` to every off-diagonal entry and renormalize rows.

    Isolated rows (all zero) become uniform over the other types.
    """
    k = m.shape[0]
    if k == 1:
        return np.ones((1, 1))
    off = ~np.eye(k, dtype=bool)
    base = m.copy()
    isolated = base.sum(axis=1) == 0
    base[isolated] = off[isolated] / (k - 1)
    base[off] += teleport
    return base / base.sum(axis=1, keepdims=True)


def stationary_distribution(
    m: np.ndarray, cfg: RandomWalkConfig = RandomWalkConfig()
) -> tuple[np.ndarray, float, int]:
    """Power iteration for ``pi = pi @ m`` starting from the uniform vector.

    Iterates the lazy chain ``(I + m) / 2``, which has the same stationary
    vector but cannot oscillate on bipartite schema graphs, and squares the
    step operator after every iteration so the tiny teleport mass still mixes
    disconnected components within a few dozen iterations.  Returns
    ``(pi, residual, iterations)`` with residual ``|pi @ m - pi|_1``.
    """
    k = m.shape[0]
    pi = np.full(k, 1.0 / k)
    residual = float(np.abs(pi @ m - pi).sum())
    if residual <= cfg.tolerance:
        return pi, residual, 0
    step = 0.5 * (np.eye(k) + m)
    for it in range(1, cfg.max_iterations + 1):
        pi = pi @ step
        pi /= pi.sum()
        residual = float(np.abs(pi @ m - pi).sum())
        if residual <= cfg.tolerance:
            return pi, residual, it
        step = step @ step
        step /= step.sum(axis=1, keepdims=True)
    raise ConvergenceError(cfg.max_iterations, residual)


def score_keys_random_walk(
    s: SchemaGraph, cfg: RandomWalkConfig = RandomWalkConfig()
) -> dict[str, float]:
    ids = s.type_ids
    if not ids:
        raise PreviewError("random-walk scoring needs at least one entity type")
    if len(ids) > 1 and cfg.teleport >= 1 / (len(ids) - 1):
        raise ValueError(f"teleport {cfg.teleport} too large for {len(ids)} types")
    _, m = transition_matrix(s)
    pi, _, _ = stationary_distribution(teleport_matrix(m, cfg.teleport), cfg)
    return {t: float(p) for t, p in zip(ids, pi)}


# ------------------------------------------------------------ non-key scores


def _check_candidate(g: EntityGraph, c: AttributeCandidate) -> None:
    if c.edge_type not in g.relationship_types:
        raise UnknownIdError(f"unknown relationship type {c.edge_type!r}")


def score_nonkey_coverage(g: EntityGraph, c: AttributeCandidate) -> int:
    _check_candidate(g, c)
    return g.edge_counts[c.edge_type]


def value_sets(g: EntityGraph, c: AttributeCandidate) -> dict[str, frozenset[str]]:
    """Each key-type entity's value on the candidate (possibly empty)."""
    return {v: g.neighbors(v, c.edge_type, c.direction) for v in g.members[c.key_type]}


def score_nonkey_entropy(g: EntityGraph, c: AttributeCandidate) -> float:
    """Base-10 entropy of the distinct value sets over non-empty tuples.

    Two tuples share a value only when their neighbor sets are equal.
    """
    _check_candidate(g, c)
    groups = Counter(vs for vs in value_sets(g, c).values() if vs)
    m = sum(groups.values())
    if m == 0:
        return 0.0
    return math.fsum(n / m * math.log10(m / n) for n in groups.values())


# ------------------------------------------------------- table/preview score


def score_table(key_score: float, nonkey_scores: Sequence[float]) -> float:
    if len(nonkey_scores) == 0:
        raise ValueError("a preview table needs at least one non-key attribute")
    return key_score * math.fsum(nonkey_scores)


def score_preview(table_scores: Iterable[float]) -> float:
    return math.fsum(table_scores)


# ------------------------------------------------------------- scored schema


def candidate_order(score: float, c: AttributeCandidate) -> tuple:
    return (-score, *c.sort_key)


@dataclass(frozen=True)
class ScoredSchema:
    """Everything the discovery solvers need, computed once per graph."""

    schema: SchemaGraph
    key_scores: Mapping[str, float]
    nonkey_scores: Mapping[AttributeCandidate, float]
    sorted_candidates: Mapping[str, tuple[AttributeCandidate, ...]]
    distances: DistanceIndex
    key_measure: str = "custom"
    nonkey_measure: str = "custom"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_scores(
        cls,
        schema: SchemaGraph,
        key_scores: Mapping[str, float],
        nonkey_scores: Mapping[AttributeCandidate, float],
        key_measure: str = "custom",
        nonkey_measure: str = "custom",
        distances: DistanceIndex | None = None,
    ) -> ScoredSchema:
        ordered: dict[str, tuple[AttributeCandidate, ...]] = {}
        for t in schema.type_ids:
            cands = incident_candidates(schema, t)
            for c in cands:
                if c not in nonkey_scores:
                    raise UnknownIdError(f"missing score for {c}")
            ordered[t] = tuple(sorted(cands, key=lambda c: candidate_order(nonkey_scores[c], c)))
            if t not in key_scores:
                raise UnknownIdError(f"missing key score for {t!r}")
        for value in [*key_scores.values(), *nonkey_scores.values()]:
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"scores must be finite and non-negative, got {value}")
        return cls(
            schema=schema,
            key_scores={t: float(key_scores[t]) for t in schema.type_ids},
            nonkey_scores={c: float(nonkey_scores[c]) for cs in ordered.values() for c in cs},
            sorted_candidates=ordered,
            distances=distances if distances is not None else all_pairs_distance(schema),
            key_measure=key_measure,
            nonkey_measure=nonkey_measure,
        )

    @property
    def type_ids(self) -> list[str]:
        return self.schema.type_ids

    def sorted_scores(self, type_id: str) -> list[float]:
        return [self.nonkey_scores[c] for c in self.sorted_candidates[type_id]]


def build_scored_schema(
    g: EntityGraph,
    s: SchemaGraph,
    key_measure: KeyMeasure | str = KeyMeasure.COVERAGE,
    nonkey_measure: NonKeyMeasure | str = NonKeyMeasure.COVERAGE,
    cfg: RandomWalkConfig = RandomWalkConfig(),
) -> ScoredSchema:
    key_measure = KeyMeasure(key_measure)
    nonkey_measure = NonKeyMeasure(nonkey_measure)
    if not s.entity_types:
        key_scores: dict[str, float] = {}
    elif key_measure is KeyMeasure.COVERAGE:
        key_scores = {t: float(score_key_coverage(g, t)) for t in s.type_ids}
    else:
        key_scores = score_keys_random_walk(s, cfg)
    scorer = score_nonkey_coverage if nonkey_measure is NonKeyMeasure.COVERAGE else score_nonkey_entropy
    nonkey_scores = {
        c: float(scorer(g, c)) for t in s.type_ids for c in incident_candidates(s, t)
    }
    return ScoredSchema.from_scores(
        s, key_scores, nonkey_scores, key_measure.value, nonkey_measure.value
    )
