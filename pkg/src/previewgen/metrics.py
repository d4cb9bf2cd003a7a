"""Ranking-quality metrics for checking attribute scores against gold labels."""

from __future__ import annotations

import math
from typing import Collection, Hashable, Iterable, Sequence


def precision_at_k(ranked: Sequence[Hashable], gold: Collection[Hashable], k: int) -> float:
    """Fraction of the top-``k`` ranked items that are gold.

    The denominator is always ``k``, so with fewer than ``k`` gold items a
    perfect ranking scores ``len(gold) / k``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    gold = set(gold)
    return sum(1 for item in ranked[:k] if item in gold) / k


def reciprocal_rank(ranked: Sequence[Hashable], gold: Collection[Hashable]) -> float:
    gold = set(gold)
    for pos, item in enumerate(ranked, start=1):
        if item in gold:
            return 1.0 / pos
    return 0.0  # no gold item ranked at all


def mean_reciprocal_rank(ranked_lists: Iterable[tuple[Sequence[Hashable], Collection[Hashable]]]) -> float:
    rr = [reciprocal_rank(ranked, gold) for ranked, gold in ranked_lists]
    return math.fsum(rr) / len(rr) if rr else 0.0


def pearson_correlation(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation: (E[XY] - E[X]E[Y]) / (sd(X) sd(Y)), population moments.

    Moments are taken about the means, which is the same quotient but avoids
    cancellation when the data sit far from zero.
    """
    if len(x) != len(y):
        raise ValueError("x and y must have the same length")
    if len(x) < 2:
        raise ValueError("need at least two observations")
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    dx = [a - mx for a in x]
    dy = [b - my for b in y]
    cov = math.fsum(a * b for a, b in zip(dx, dy)) / n
    vx = math.fsum(a * a for a in dx) / n
    vy = math.fsum(b * b for b in dy) / n
    if vx == 0 or vy == 0:
        raise ValueError("correlation undefined: zero variance")
    return max(-1.0, min(1.0, cov / math.sqrt(vx * vy)))
