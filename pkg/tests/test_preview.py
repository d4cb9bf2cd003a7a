import json
import random

import pytest

from previewgen import (
    AttributeCandidate,
    Constraints,
    Direction,
    InfeasibleError,
    Mode,
    Preview,
    PreviewTable,
    brute_force,
    derive_schema_graph,
    materialize,
    materialize_preview,
    parse_entity_graph,
    preview_from_json,
    render,
)
from previewgen.preview import preview_to_dict
from tests.oracles import random_entity_graph

IN, OUT = Direction.INCOMING, Direction.OUTGOING

FILM_ROWS = {
    ("Men in Black", (("Barry Sonnenfeld",), ("Action Film", "Science Fiction"))),
    ("Men in Black II", (("Barry Sonnenfeld",), ("Action Film", "Science Fiction"))),
    ("Hancock", (("Peter Berg",), ())),
    ("I, Robot", (("Alex Proyas",), ("Action Film",))),
}


def film_table():
    nonkeys = (AttributeCandidate("film", "director", IN), AttributeCandidate("film", "genres", OUT))
    return PreviewTable("film", nonkeys, (4.0, 5.0), 36.0)


def actor_table():
    return PreviewTable("film_actor", (AttributeCandidate("film_actor", "award_winners_actor", OUT),), (2.0,), 4.0)


def test_film_table_rows(film_graph):
    m = materialize(film_graph, film_table(), 4)
    assert set(m.rows) == FILM_ROWS
    assert m.key_label == "Film"
    assert m.column_labels == ["← Director", "Genres"]


def test_sample_larger_than_population(film_graph):
    assert set(materialize(film_graph, film_table(), 50).rows) == FILM_ROWS


def test_sample_subset_and_seed_determinism(film_graph):
    a = materialize(film_graph, film_table(), 2, seed=3)
    b = materialize(film_graph, film_table(), 2, seed=3)
    assert a == b
    assert len(a.rows) == 2
    assert set(a.rows) <= FILM_ROWS
    assert len({r[0] for r in a.rows}) == 2
    seen = {materialize(film_graph, film_table(), 2, seed=s).rows for s in range(20)}
    assert len(seen) > 1


def test_sample_size_must_be_positive(film_graph):
    with pytest.raises(ValueError):
        materialize(film_graph, film_table(), 0)


def test_empty_key_type_is_an_error():
    g = parse_entity_graph("ET a A\nET b B\nRT r R a b\nEN x X a\n")
    t = PreviewTable("b", (AttributeCandidate("b", "r", IN),), (0.0,), 0.0)
    with pytest.raises(InfeasibleError):
        materialize(g, t, 3)


def _two_table_preview():
    return Preview((film_table(), actor_table()), 40.0)


def test_markdown_two_tables(film_graph):
    p = _two_table_preview()
    md = render(p, materialize_preview(film_graph, p, 4), "markdown")
    assert "| **Film** | ← Director | Genres |" in md
    assert "| Hancock | Peter Berg | - |" in md
    assert "| Men in Black | Barry Sonnenfeld | {Action Film, Science Fiction} |" in md
    assert "| I, Robot | Alex Proyas | Action Film |" in md
    assert "| **Film Actor** | Award Winners |" in md
    assert "| Will Smith | Saturn Award |" in md
    assert "| Tommy Lee Jones | Academy Award |" in md


def test_json_layout(film_graph):
    p = Preview((film_table(),), 36.0)
    c = Constraints(1, 2)
    out = render(p, materialize_preview(film_graph, p, 4), "json", constraints=c,
                 measures={"key": "coverage", "nonkey": "coverage"})
    data = json.loads(out)
    assert list(data) == ["constraints", "measures", "total_score", "tables"]
    assert list(data["constraints"]) == ["k", "n", "mode"]
    assert len(data["tables"]) == 1
    t = data["tables"][0]
    assert list(t) == ["key_type", "key_label", "score", "columns", "rows"]
    assert list(t["columns"][0]) == ["edge_type", "label", "direction", "score"]
    hancock = next(r for r in t["rows"] if r["key"] == "Hancock")
    assert hancock["cells"] == [["Peter Berg"], []]


def test_json_constraints_with_distance(film_cov, film_graph):
    c = Constraints(2, 6, Mode.DIVERSE, 2)
    p = brute_force(film_cov, c)
    data = json.loads(render(p, materialize_preview(film_graph, p, 3), constraints=c))
    assert data["constraints"] == {"k": 2, "n": 6, "d": 2, "mode": "diverse"}


def test_scores_have_six_significant_digits():
    t = PreviewTable("a", (AttributeCandidate("a", "r", OUT),), (1 / 3,), 2 / 3)
    g = parse_entity_graph("ET a A\nRT r R a a\nEN x X a\nED r x x\n")
    p = Preview((t,), 2 / 3)
    data = preview_to_dict(p, materialize_preview(g, p, 1))
    assert data["total_score"] == 0.666667
    assert data["tables"][0]["columns"][0]["score"] == 0.333333


def test_json_round_trip(film_cov, film_graph):
    p = brute_force(film_cov, Constraints(2, 6))
    back = preview_from_json(render(p, materialize_preview(film_graph, p, 3)))
    assert back == p


def test_render_rejects_mismatched_tables(film_graph):
    p = _two_table_preview()
    tables = materialize_preview(film_graph, p, 2)[:1]
    with pytest.raises(ValueError):
        render(p, tables, "json")
    with pytest.raises(ValueError):
        render(p, tables, "markdown")


def test_materialization_never_fabricates():
    rng = random.Random(4)
    for _ in range(40):
        g = random_entity_graph(rng, 4, 6, 20, 50)
        s = derive_schema_graph(g)
        edges = g.edges
        names = {e.id: e.name for e in g.entities.values()}
        by_name = {}
        for eid, name in names.items():
            by_name.setdefault(name, set()).add(eid)
        for rt in s.relationship_types.values():
            for key, direction in ((rt.source, OUT), (rt.target, IN)):
                t = PreviewTable(key, (AttributeCandidate(key, rt.id, direction),), (1.0,), 1.0)
                m = materialize(g, t, 5, seed=rng.randrange(100))
                for key_name, (cell,) in m.rows:
                    for v in by_name[key_name]:
                        if key not in g.entities[v].types:
                            continue
                        want = sorted({
                            names[b if direction is OUT else a]
                            for (r, a, b) in edges
                            if r == rt.id and (a if direction is OUT else b) == v
                        })
                        assert list(cell) == want
