import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from previewgen import (
    Constraints,
    InfeasibleError,
    Mode,
    all_optimal_previews,
    apriori_discover,
    brute_force,
    compute_preview_for_subset,
    discover,
    dp_concise,
    enumerate_feasible_subsets,
)
from previewgen.discovery import Gain
from tests.oracles import best_split_any_subset, best_split_by_compositions, random_scored


def summary(p):
    return [(t.key, [c.edge_type for c in t.nonkeys]) for t in p.tables]


FILM_CONCISE = [
    ("film", ["actor", "genres", "director", "producer"]),
    ("film_actor", ["actor", "award_winners_actor"]),
]
FILM_DIVERSE = [
    ("award", ["award_winners_actor"]),
    ("film", ["actor", "genres", "director", "producer", "executive_producer"]),
]


def test_constraints_validation():
    with pytest.raises(ValueError):
        Constraints(0, 3)
    with pytest.raises(ValueError):
        Constraints(3, 2)
    with pytest.raises(ValueError):
        Constraints(2, 4, Mode.TIGHT)
    with pytest.raises(ValueError):
        Constraints(2, 4, Mode.DIVERSE, 0)
    with pytest.raises(ValueError):
        Constraints(2, 4, Mode.CONCISE, 2)


def test_subset_allocation_fixture(film_cov):
    p = compute_preview_for_subset(film_cov, {"film", "film_actor"}, 6)
    assert summary(p) == FILM_CONCISE
    assert p.total_score == 84
    assert [t.score for t in p.tables] == [68, 16]


def test_subset_allocation_forced(film_cov):
    p = compute_preview_for_subset(film_cov, ["film", "award", "film_genre"], 3)
    assert all(len(t.nonkeys) == 1 for t in p.tables)
    for t in p.tables:
        assert t.nonkeys[0] == film_cov.sorted_candidates[t.key][0]


def test_subset_allocation_padding_never_emitted(film_cov):
    # film_genre has a single candidate; the spare budget must not invent columns
    p = compute_preview_for_subset(film_cov, ["film_genre"], 5)
    assert summary(p) == [("film_genre", ["genres"])]


def test_subset_allocation_errors(film_cov):
    with pytest.raises(ValueError):
        compute_preview_for_subset(film_cov, ["film", "award"], 1)


def test_subset_allocation_matches_compositions():
    rng = random.Random(1)
    checked = 0
    while checked < 500:
        scored = random_scored(rng, 8, rng.randint(6, 16))
        usable = [t for t in scored.type_ids if scored.sorted_candidates[t]]
        k = rng.randint(1, min(3, len(usable)))
        subset = rng.sample(usable, k)
        n = rng.randint(k, 9)
        p = compute_preview_for_subset(scored, subset, n)
        keys = sorted(subset)
        want = best_split_by_compositions(
            [scored.key_scores[t] for t in keys], [scored.sorted_scores(t) for t in keys], n
        )
        assert p.total_score == want
        assert p.nonkey_count <= n
        checked += 1


def test_top_m_rule_against_unrestricted_choice():
    # no prefix assumption in the oracle: any non-empty subset per table
    rng = random.Random(2)
    for _ in range(150):
        scored = random_scored(rng, 5, rng.randint(3, 7))
        usable = [t for t in scored.type_ids if 0 < len(scored.sorted_candidates[t]) <= 5]
        if len(usable) < 2:
            continue
        subset = sorted(rng.sample(usable, 2))
        n = rng.randint(2, 6)
        p = compute_preview_for_subset(scored, subset, n)
        want = best_split_any_subset(
            [scored.key_scores[t] for t in subset], [scored.sorted_scores(t) for t in subset], n
        )
        assert p.total_score == want


def test_raw_gain_can_lose():
    rng = random.Random(5)
    worse = 0
    for _ in range(200):
        scored = random_scored(rng, 6, 12, integer=False)
        usable = [t for t in scored.type_ids if scored.sorted_candidates[t]]
        subset = usable[:3]
        raw = compute_preview_for_subset(scored, subset, 7, gain=Gain.RAW)
        weighted = compute_preview_for_subset(scored, subset, 7)
        assert raw.total_score <= weighted.total_score + 1e-9
        worse += raw.total_score < weighted.total_score - 1e-9
    assert worse > 0


def test_brute_force_fixture(film_cov):
    concise = brute_force(film_cov, Constraints(2, 6))
    assert summary(concise) == FILM_CONCISE
    diverse = brute_force(film_cov, Constraints(2, 6, Mode.DIVERSE, 2))
    assert summary(diverse) == FILM_DIVERSE
    assert diverse.total_score == 78


def test_fixture_concise_ties_are_visible(film_cov):
    optima = all_optimal_previews(film_cov, Constraints(2, 6))
    assert [p.keys for p in optima] == [("film", "film_actor"), ("film", "film_director")]
    assert {p.total_score for p in optima} == {84}


def test_k1_is_best_single_table(film_cov):
    p = brute_force(film_cov, Constraints(1, 3))
    singles = [compute_preview_for_subset(film_cov, [t], 3) for t in film_cov.type_ids]
    assert p.total_score == max(s.total_score for s in singles)


def test_brute_force_errors(film_cov):
    with pytest.raises(InfeasibleError):
        brute_force(film_cov, Constraints(7, 7))
    with pytest.raises(InfeasibleError):
        brute_force(film_cov, Constraints(6, 6, Mode.TIGHT, 1))


def test_dp_fixture(film_cov):
    p = dp_concise(film_cov, 2, 6)
    assert summary(p) == FILM_CONCISE
    assert p.total_score == brute_force(film_cov, Constraints(2, 6)).total_score


def test_dp_all_types_forced(film_cov):
    K = len(film_cov.type_ids)
    p = dp_concise(film_cov, K, K)
    assert p.keys == tuple(film_cov.type_ids)
    assert all(len(t.nonkeys) == 1 for t in p.tables)


def test_dp_errors(film_cov):
    with pytest.raises(InfeasibleError):
        dp_concise(film_cov, 7, 9)
    with pytest.raises(ValueError):
        dp_concise(film_cov, 3, 2)


def test_dp_equals_brute_force_sweep():
    rng = random.Random(7)
    for _ in range(200):
        K = rng.randint(1, 12)
        scored = random_scored(rng, K, rng.randint(0, 2 * K))
        k = rng.randint(1, min(5, K))
        n = rng.randint(k, 12)
        c = Constraints(k, n)
        try:
            want = brute_force(scored, c)
        except InfeasibleError:
            with pytest.raises(InfeasibleError):
                dp_concise(scored, k, n)
            continue
        got = dp_concise(scored, k, n)
        assert got.total_score == want.total_score
        assert got == want


def test_feasible_subsets_fixture(film_cov):
    dist, ids = film_cov.distances, film_cov.type_ids
    tight = enumerate_feasible_subsets(dist, ids, 2, 1, Mode.TIGHT)
    adjacent = {tuple(sorted(p)) for p in film_cov.schema.weights if p[0] != p[1]}
    assert set(tight) == adjacent
    diverse = enumerate_feasible_subsets(dist, ids, 2, 2, Mode.DIVERSE)
    assert set(diverse) == set(itertools.combinations(ids, 2)) - adjacent
    assert diverse == sorted(diverse)


def test_feasible_subsets_match_exhaustive_filter():
    rng = random.Random(8)
    for _ in range(60):
        scored = random_scored(rng, 10, rng.randint(5, 20))
        ids = scored.type_ids
        dist = scored.distances
        for k in (3, 4):
            for mode in (Mode.TIGHT, Mode.DIVERSE):
                d = rng.randint(1, 3)
                got = enumerate_feasible_subsets(dist, ids, k, d, mode)
                c = Constraints(k, k, mode, d)
                want = [
                    s for s in itertools.combinations(ids, k)
                    if all(c.admits(dist(a, b)) for a, b in itertools.combinations(s, 2))
                ]
                assert got == want


def test_feasible_subsets_k1_and_empty(film_cov):
    ids = film_cov.type_ids
    assert enumerate_feasible_subsets(film_cov.distances, ids, 1, 1, "tight") == [(t,) for t in ids]
    assert enumerate_feasible_subsets(film_cov.distances, ids, 5, 1, "tight") == []


def test_apriori_fixture(film_cov):
    p = apriori_discover(film_cov, Constraints(2, 6, Mode.DIVERSE, 2))
    assert p == brute_force(film_cov, Constraints(2, 6, Mode.DIVERSE, 2))
    assert summary(p) == FILM_DIVERSE


def test_apriori_rejects_concise(film_cov):
    with pytest.raises(ValueError):
        apriori_discover(film_cov, Constraints(2, 6))


def test_apriori_infeasible(film_cov):
    with pytest.raises(InfeasibleError):
        apriori_discover(film_cov, Constraints(4, 6, Mode.TIGHT, 1))


def test_tight_beyond_diameter_is_concise(film_cov):
    diam = int(film_cov.distances.diameter())
    tight = apriori_discover(film_cov, Constraints(2, 6, Mode.TIGHT, diam))
    assert tight.total_score == dp_concise(film_cov, 2, 6).total_score


def test_apriori_equals_brute_force_sweep():
    rng = random.Random(9)
    for _ in range(100):
        K = rng.randint(2, 12)
        scored = random_scored(rng, K, rng.randint(1, 2 * K))
        k = rng.randint(2, min(4, K))
        n = rng.randint(k, 10)
        for mode in (Mode.TIGHT, Mode.DIVERSE):
            for d in (1, 2, 3):
                c = Constraints(k, n, mode, d)
                try:
                    want = brute_force(scored, c)
                except InfeasibleError:
                    with pytest.raises(InfeasibleError):
                        apriori_discover(scored, c)
                    continue
                assert apriori_discover(scored, c) == want


def _check_preview(scored, p, c):
    keys = p.keys
    assert len(set(keys)) == len(keys) == c.k
    assert p.nonkey_count <= c.n
    for t in p.tables:
        assert t.nonkeys == scored.sorted_candidates[t.key][: len(t.nonkeys)]
        assert len(t.nonkeys) >= 1
    for a, b in itertools.combinations(keys, 2):
        assert c.admits(scored.distances(a, b))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 9), st.integers(1, 4), st.sampled_from(list(Mode)), st.integers(1, 3))
def test_solver_invariants(seed, K, k, mode, d):
    rng = random.Random(seed)
    scored = random_scored(rng, K, rng.randint(K, 2 * K))
    k = min(k, K)
    n = k + rng.randint(0, 5)
    c = Constraints(k, n, mode, None if mode is Mode.CONCISE else d)
    try:
        p = discover(scored, c)
    except InfeasibleError:
        return
    _check_preview(scored, p, c)
    assert discover(scored, c) == p  # deterministic
    if mode is Mode.CONCISE:
        bigger = dp_concise(scored, k, n + 1)
        assert bigger.total_score >= p.total_score


def test_diverse_one_equals_concise():
    rng = random.Random(10)
    for _ in range(40):
        scored = random_scored(rng, 8, 12)
        c = Constraints(3, 6)
        try:
            concise = dp_concise(scored, 3, 6)
        except InfeasibleError:
            continue
        diverse = apriori_discover(scored, Constraints(3, 6, Mode.DIVERSE, 1))
        assert diverse.total_score == concise.total_score
        big = 10**6
        tight = apriori_discover(scored, Constraints(3, 6, Mode.TIGHT, big))
        # disconnected pairs are unreachable and fail any tight bound
        if all(scored.distances(a, b) != float("inf") for a in concise.keys for b in concise.keys):
            assert tight.total_score == concise.total_score
        assert c.k == 3


def test_discover_dispatch(film_cov):
    assert discover(film_cov, Constraints(2, 6)) == dp_concise(film_cov, 2, 6)
    with pytest.raises(ValueError):
        discover(film_cov, Constraints(2, 6, Mode.TIGHT, 1), "dp")
    with pytest.raises(ValueError):
        discover(film_cov, Constraints(2, 6), "nope")
