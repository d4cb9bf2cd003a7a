"""Optimal preview discovery under size and distance constraints.

Three exact solvers share one allocation routine:

* ``brute_force`` walks every k-subset of entity types;
* ``dp_concise`` runs a dynamic program over (tables, budget, type prefix) and
  only handles concise previews;
* ``apriori_discover`` first builds the distance-compatible k-subsets level by
  level, then allocates non-key attributes for each.

All of them return the same canonical optimum: highest score, then the
lexicographically smallest sorted tuple of key type ids.  Scores that differ
by less than ``TIE_RTOL`` relative are treated as ties so that summation order
never decides the winner.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import math
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InfeasibleError, SolverTimeout, UnknownIdError
from .graph import AttributeCandidate, DistanceIndex
from .scoring import ScoredSchema, score_preview, score_table

TIE_RTOL = 1e-12
NEG_INF = -math.inf


class Mode(str, enum.Enum):
    CONCISE = "concise"
    TIGHT = "tight"
    DIVERSE = "diverse"


class Gain(str, enum.Enum):
    WEIGHTED = "weighted"  # key score * non-key score
    RAW = "raw"  # non-key score alone; not optimal when key scores differ


@dataclass(frozen=True)
class Constraints:
    k: int
    n: int
    mode: Mode = Mode.CONCISE
    d: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.n < self.k:
            raise ValueError(f"n={self.n} < k={self.k}: every table needs a non-key attribute")
        if self.mode is Mode.CONCISE:
            if self.d is not None:
                raise ValueError("distance bound d only applies to tight/diverse previews")
        elif self.d is None or self.d < 1:
            raise ValueError(f"{self.mode.value} previews need a distance bound d >= 1")

    def admits(self, distance: float) -> bool:
        """Whether two key types at ``distance`` may share a preview."""
        if self.mode is Mode.TIGHT:
            return distance <= self.d
        if self.mode is Mode.DIVERSE:
            return distance >= self.d
        return True


@dataclass(frozen=True)
class PreviewTable:
    key: str
    nonkeys: tuple[AttributeCandidate, ...]
    nonkey_scores: tuple[float, ...]
    score: float


@dataclass(frozen=True)
class Preview:
    tables: tuple[PreviewTable, ...]
    total_score: float

    @property
    def keys(self) -> tuple[str, ...]:
        return tuple(t.key for t in self.tables)

    @property
    def nonkey_count(self) -> int:
        return sum(len(t.nonkeys) for t in self.tables)


def _close(a: float, b: float, scale: float) -> bool:
    return abs(a - b) <= TIE_RTOL * abs(scale)


def _better(a: float, b: float) -> bool:
    """``a`` beats ``b`` by more than float noise."""
    return a > b + TIE_RTOL * max(abs(a), abs(b))


class _Tables:
    """Integer-indexed view of a ScoredSchema used by the inner loops."""

    def __init__(self, scored: ScoredSchema) -> None:
        self.ids = scored.type_ids
        self.index = {t: i for i, t in enumerate(self.ids)}
        self.key = [scored.key_scores[t] for t in self.ids]
        self.raw = [scored.sorted_scores(t) for t in self.ids]
        self.gains = [[self.key[i] * s for s in self.raw[i]] for i in range(len(self.ids))]
        # tie-break between tables at equal gain: candidate id, direction, key id
        order = sorted(
            ((c.sort_key, c.key_type), i, j)
            for i, t in enumerate(self.ids)
            for j, c in enumerate(scored.sorted_candidates[t])
        )
        self.rank = [[0] * len(r) for r in self.raw]
        for r, (_, i, j) in enumerate(order):
            self.rank[i][j] = r

    @classmethod
    def of(cls, scored: ScoredSchema) -> _Tables:
        cached = scored._cache.get("tables")
        if cached is None:
            cached = scored._cache["tables"] = cls(scored)
        return cached

    def allocate(self, subset: Sequence[int], n: int, gain: Gain = Gain.WEIGHTED) -> tuple[float, list[int]]:
        """Greedy slot filling for one key subset.

        Every table takes its best candidate, then the remaining ``n - k``
        slots go to the largest marginal gains, merging the per-table sorted
        lists with a heap.  Gains inside a table never increase, so the
        greedy choice is optimal.  Returns (score, candidates per table).
        """
        counts = [1] * len(subset)
        value = math.fsum(self.gains[i][0] for i in subset)
        prio = self.gains if gain is Gain.WEIGHTED else self.raw
        heap = [(-prio[i][1], self.rank[i][1], pos) for pos, i in enumerate(subset) if len(prio[i]) > 1]
        heapq.heapify(heap)
        extra = []
        for _ in range(n - len(subset)):
            if not heap:
                break  # only zero-score padding left
            _, _, pos = heapq.heappop(heap)
            i = subset[pos]
            extra.append(self.gains[i][counts[pos]])
            counts[pos] += 1
            c = counts[pos]
            if c < len(prio[i]):
                heapq.heappush(heap, (-prio[i][c], self.rank[i][c], pos))
        if extra:
            value = math.fsum([value, *extra])
        return value, counts


def _build_preview(scored: ScoredSchema, keys: Sequence[str], counts: Sequence[int]) -> Preview:
    tables = []
    for t, m in sorted(zip(keys, counts)):
        nonkeys = scored.sorted_candidates[t][:m]
        scores = tuple(scored.nonkey_scores[c] for c in nonkeys)
        tables.append(PreviewTable(t, nonkeys, scores, score_table(scored.key_scores[t], scores)))
    return Preview(tuple(tables), score_preview(t.score for t in tables))


def compute_preview_for_subset(
    scored: ScoredSchema, subset: Iterable[str], n: int, gain: Gain | str = Gain.WEIGHTED
) -> Preview:
    """Best allocation of at most ``n`` non-key attributes over the given key types."""
    tabs = _Tables.of(scored)
    keys = sorted(set(subset))
    if n < len(keys):
        raise ValueError(f"budget n={n} smaller than subset size {len(keys)}")
    idx = []
    for t in keys:
        if t not in tabs.index:
            raise UnknownIdError(f"unknown entity type {t!r}")
        if not tabs.raw[tabs.index[t]]:
            raise InfeasibleError(f"entity type {t!r} has no candidate non-key attribute")
        idx.append(tabs.index[t])
    _, counts = tabs.allocate(idx, n, Gain(gain))
    return _build_preview(scored, keys, counts)


def _usable(tabs: _Tables) -> list[int]:
    return [i for i in range(len(tabs.ids)) if tabs.raw[i]]


def _compatibility(tabs: _Tables, dist: DistanceIndex, c: Constraints) -> list[list[bool]]:
    ids = tabs.ids
    return [[c.admits(dist(a, b)) for b in ids] for a in ids]


def _check_size(tabs: _Tables, c: Constraints) -> None:
    if len(tabs.ids) < c.k:
        raise InfeasibleError(f"only {len(tabs.ids)} entity types for k={c.k} tables")


def brute_force(
    scored: ScoredSchema,
    c: Constraints,
    *,
    time_limit: float | None = None,
    gain: Gain | str = Gain.WEIGHTED,
) -> Preview:
    """Enumerate every k-subset of entity types (distance-filtered unless concise).

    ``time_limit`` (seconds) aborts with SolverTimeout; the benchmark uses it
    to bound runs that would otherwise take hours.
    """
    return _brute(scored, c, time_limit, Gain(gain), all_optima=False)[0]


def all_optimal_previews(scored: ScoredSchema, c: Constraints) -> list[Preview]:
    """Every co-optimal key subset, each with its canonical allocation."""
    return _brute(scored, c, None, Gain.WEIGHTED, all_optima=True)


def _brute(scored, c, time_limit, gain, all_optima) -> list[Preview]:
    tabs = _Tables.of(scored)
    _check_size(tabs, c)
    compat = None if c.mode is Mode.CONCISE else _compatibility(tabs, scored.distances, c)
    usable = _usable(tabs)
    start = time.perf_counter()
    total = math.comb(len(usable), c.k)
    best = NEG_INF
    winners: list[tuple[tuple[int, ...], list[int], float]] = []
    for count, subset in enumerate(itertools.combinations(usable, c.k)):
        if time_limit is not None and count & 0xFFF == 0:
            elapsed = time.perf_counter() - start
            if elapsed > time_limit:
                raise SolverTimeout(count, total, elapsed)
        if compat is not None and not all(compat[a][b] for a, b in itertools.combinations(subset, 2)):
            continue
        value, counts = tabs.allocate(subset, c.n, gain)
        if best == NEG_INF or _better(value, best):
            best = value
            winners = [(subset, counts, value)]
        elif all_optima and not _better(best, value):
            winners.append((subset, counts, value))
    if best == NEG_INF:
        raise InfeasibleError(f"no {c.mode.value} preview satisfies k={c.k}, n={c.n}, d={c.d}")
    winners = [w for w in winners if not _better(best, w[2])]
    return [_build_preview(scored, [tabs.ids[i] for i in s], counts) for s, counts, _ in winners]


def dp_concise(scored: ScoredSchema, k: int, n: int) -> Preview:
    """Dynamic program over (tables used, budget, type suffix) for concise previews.

    Types are taken in id order.  ``best[x][j][b]`` is the best score using
    exactly ``j`` tables and at most ``b`` non-keys from types ``x..K-1``:
    either type ``x`` is skipped, or it keys a table with its top ``m``
    candidates next to an optimum for ``j-1`` tables and ``b-m`` budget over
    the remaining types.  Walking forward from the first type and including a
    type whenever some optimum does yields the lexicographically smallest
    optimal key tuple, which matches ``brute_force``.
    """
    c = Constraints(k, n)
    tabs = _Tables.of(scored)
    _check_size(tabs, c)
    K = len(tabs.ids)
    # table value of type i with its top m candidates, m = 0..min(len, n)
    table_val = [
        [0.0] + [tabs.key[i] * math.fsum(tabs.raw[i][:m]) for m in range(1, min(len(tabs.raw[i]), n) + 1)]
        for i in range(K)
    ]
    best = [[[NEG_INF] * (n + 1) for _ in range(k + 1)] for _ in range(K + 1)]
    for x in range(K + 1):
        best[x][0] = [0.0] * (n + 1)
    for x in range(K - 1, -1, -1):
        nxt, cur, tv = best[x + 1], best[x], table_val[x]
        for j in range(1, k + 1):
            prev = nxt[j - 1]
            row = cur[j]
            for b in range(j, n + 1):
                top = nxt[j][b]
                for m in range(1, min(b - (j - 1), len(tv) - 1) + 1):
                    rest = prev[b - m]
                    if rest != NEG_INF and rest + tv[m] > top:
                        top = rest + tv[m]
                row[b] = top
    opt = best[0][k][n]
    if opt == NEG_INF:
        raise InfeasibleError(f"no concise preview with k={k}, n={n}")

    keys: list[int] = []
    states = {(k, n)}
    for x in range(K):
        if len(keys) == k:
            break
        tv = table_val[x]
        take = set()
        for j, b in states:
            if j == 0:
                continue
            for m in range(1, min(b - (j - 1), len(tv) - 1) + 1):
                rest = best[x + 1][j - 1][b - m]
                if rest != NEG_INF and _close(rest + tv[m], best[x][j][b], opt):
                    take.add((j - 1, b - m))
        if take:
            keys.append(x)
            states = take
        else:
            states = {(j, b) for j, b in states if _close(best[x + 1][j][b], best[x][j][b], opt)}
    return compute_preview_for_subset(scored, [tabs.ids[i] for i in keys], n)


def enumerate_feasible_subsets(
    dist: DistanceIndex, types: Sequence[str], k: int, d: int, mode: Mode | str
) -> list[tuple[str, ...]]:
    """All k-subsets of ``types`` whose every pair meets the distance bound.

    Level ``i`` joins two (i-1)-subsets that agree on everything but their
    last element, keeping the join when that last pair is compatible; the
    other pairs were already checked at earlier levels.  Subsets come out in
    the order of ``types`` (lexicographic in positions).
    """
    if k < 1:
        raise ValueError("k must be positive")
    c = Constraints(k, k, Mode(mode), d)
    if c.mode is Mode.CONCISE:
        raise ValueError("distance-constrained enumeration needs tight or diverse mode")
    compat = [[c.admits(dist(a, b)) for b in types] for a in types]
    return [tuple(types[i] for i in s) for s in _apriori_levels(compat, k)]


def _apriori_levels(compat: list[list[bool]], k: int) -> list[tuple[int, ...]]:
    level: list[tuple[int, ...]] = [(i,) for i in range(len(compat))]
    for _ in range(k - 1):
        joined: list[tuple[int, ...]] = []
        start = 0
        while start < len(level):
            prefix = level[start][:-1]
            end = start + 1
            while end < len(level) and level[end][:-1] == prefix:
                end += 1
            for a in range(start, end):
                base, last = level[a], level[a][-1]
                row = compat[last]
                for b in range(a + 1, end):
                    tail = level[b][-1]
                    if row[tail]:
                        joined.append(base + (tail,))
            start = end
        level = joined
        if not level:
            break
    return level


def apriori_discover(scored: ScoredSchema, c: Constraints, gain: Gain | str = Gain.WEIGHTED) -> Preview:
    if c.mode is Mode.CONCISE:
        raise ValueError("apriori_discover handles tight/diverse previews; use dp_concise")
    tabs = _Tables.of(scored)
    _check_size(tabs, c)
    gain = Gain(gain)
    usable = _usable(tabs)
    full = _compatibility(tabs, scored.distances, c)
    compat = [[full[a][b] for b in usable] for a in usable]
    best = NEG_INF
    winner = None
    for s in _apriori_levels(compat, c.k):
        subset = tuple(usable[i] for i in s)
        value, counts = tabs.allocate(subset, c.n, gain)
        if winner is None or _better(value, best):
            best, winner = value, (subset, counts)
    if winner is None:
        raise InfeasibleError(f"no {c.mode.value} preview satisfies k={c.k}, n={c.n}, d={c.d}")
    return _build_preview(scored, [tabs.ids[i] for i in winner[0]], winner[1])


def discover(scored: ScoredSchema, c: Constraints, algorithm: str = "auto") -> Preview:
    """Dispatch to a solver; ``auto`` picks dp for concise, apriori otherwise."""
    if algorithm == "auto":
        algorithm = "dp" if c.mode is Mode.CONCISE else "apriori"
    if algorithm == "brute":
        return brute_force(scored, c)
    if algorithm == "dp":
        if c.mode is not Mode.CONCISE:
            raise ValueError("the dp solver only handles concise previews")
        return dp_concise(scored, c.k, c.n)
    if algorithm == "apriori":
        return apriori_discover(scored, c)
    raise ValueError(f"unknown algorithm {algorithm!r}")
