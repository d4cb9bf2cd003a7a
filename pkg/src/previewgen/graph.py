"""Entity graphs, their derived schema graphs, and structural queries.

An entity graph is read from a small line-oriented text format::

    ET <type-id> <label>
    RT <edge-type-id> <label> <src-type-id> <dst-type-id>
    EN <entity-id> <name> <type-id> [<type-id> ...]
    ED <edge-type-id> <src-entity-id> <dst-entity-id>

Fields are whitespace separated, ``#`` starts a comment, and underscores in
labels and names stand for spaces.  Records may appear in any order.
"""

from __future__ import annotations

import enum
import io
import math
from collections import Counter, defaultdict, deque
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, TextIO

from .errors import GraphParseError, GraphValidationError, UnknownIdError

UNREACHABLE = math.inf


@dataclass(frozen=True)
class EntityType:
    id: str
    label: str


@dataclass(frozen=True)
class RelationshipType:
    id: str
    label: str
    source: str
    target: str

    @property
    def is_self_loop(self) -> bool:
        return self.source == self.target


@dataclass(frozen=True)
class Entity:
    id: str
    name: str
    types: frozenset[str]


class Direction(str, enum.Enum):
    OUTGOING = "out"
    INCOMING = "in"


@dataclass(frozen=True, order=True)
class AttributeCandidate:
    """A relationship type seen from one of its endpoint types.

    ``direction`` is relative to ``key_type``: OUTGOING means the key type is
    the relationship's source.
    """

    key_type: str
    edge_type: str
    direction: Direction

    @property
    def sort_key(self) -> tuple[str, int]:
        return (self.edge_type, 0 if self.direction is Direction.OUTGOING else 1)


Edge = tuple[str, str, str]  # (edge type id, source entity id, target entity id)


class EntityGraph:
    """Immutable typed multigraph of entities and relationship instances."""

    def __init__(
        self,
        entity_types: Iterable[EntityType] = (),
        relationship_types: Iterable[RelationshipType] = (),
        entities: Iterable[Entity] = (),
        edges: Iterable[Edge] = (),
    ) -> None:
        self.entity_types: dict[str, EntityType] = {}
        for et in entity_types:
            if et.id in self.entity_types:
                raise GraphValidationError(f"duplicate entity type {et.id!r}")
            self.entity_types[et.id] = et
        self.relationship_types: dict[str, RelationshipType] = {}
        for rt in relationship_types:
            if rt.id in self.relationship_types:
                raise GraphValidationError(f"duplicate relationship type {rt.id!r}")
            for end in (rt.source, rt.target):
                if end not in self.entity_types:
                    raise GraphValidationError(
                        f"relationship type {rt.id!r} references undeclared entity type {end!r}"
                    )
            self.relationship_types[rt.id] = rt
        self.entities: dict[str, Entity] = {}
        for en in entities:
            if en.id in self.entities:
                raise GraphValidationError(f"duplicate entity {en.id!r}")
            if not en.types:
                raise GraphValidationError(f"entity {en.id!r} has no type")
            for t in en.types:
                if t not in self.entity_types:
                    raise GraphValidationError(f"entity {en.id!r} has undeclared type {t!r}")
            self.entities[en.id] = en
        # canonical order so that line order never leaks into results
        self.edges: tuple[Edge, ...] = tuple(sorted(edges))
        for edge_type, src, dst in self.edges:
            self._check_edge(edge_type, src, dst)

    def _check_edge(self, edge_type: str, src: str, dst: str) -> None:
        rt = self.relationship_types.get(edge_type)
        if rt is None:
            raise GraphValidationError(f"edge references undeclared relationship type {edge_type!r}")
        for ent_id, want in ((src, rt.source), (dst, rt.target)):
            ent = self.entities.get(ent_id)
            if ent is None:
                raise GraphValidationError(f"edge {edge_type} references undeclared entity {ent_id!r}")
            if want not in ent.types:
                raise GraphValidationError(
                    f"edge {edge_type} {src}->{dst}: entity {ent_id!r} lacks type {want!r}"
                )

    def __repr__(self) -> str:
        return f"EntityGraph(entities={len(self.entities)}, edges={len(self.edges)})"

    @cached_property
    def members(self) -> dict[str, tuple[str, ...]]:
        """Entity ids per entity type, sorted."""
        out: dict[str, list[str]] = {t: [] for t in self.entity_types}
        for en in self.entities.values():
            for t in en.types:
                out[t].append(en.id)
        return {t: tuple(sorted(ids)) for t, ids in out.items()}

    @cached_property
    def edge_counts(self) -> Counter[str]:
        return Counter(e[0] for e in self.edges)

    @cached_property
    def _adjacency(self) -> dict[tuple[str, Direction], dict[str, frozenset[str]]]:
        acc: dict[tuple[str, Direction], dict[str, set[str]]] = defaultdict(lambda: defaultdict(set))
        for edge_type, src, dst in self.edges:
            acc[(edge_type, Direction.OUTGOING)][src].add(dst)
            acc[(edge_type, Direction.INCOMING)][dst].add(src)
        return {k: {v: frozenset(s) for v, s in m.items()} for k, m in acc.items()}

    def neighbors(self, entity_id: str, edge_type: str, direction: Direction) -> frozenset[str]:
        """Entities reached from ``entity_id`` along ``edge_type`` in ``direction``."""
        return self._adjacency.get((edge_type, direction), {}).get(entity_id, frozenset())


@dataclass(frozen=True)
class SchemaGraph:
    entity_types: Mapping[str, EntityType]
    relationship_types: Mapping[str, RelationshipType]
    # unordered pair (sorted tuple) -> instance count over all relationship types
    weights: Mapping[tuple[str, str], int]

    @property
    def type_ids(self) -> list[str]:
        return sorted(self.entity_types)

    def weight(self, a: str, b: str) -> int:
        return self.weights.get((a, b) if a <= b else (b, a), 0)


def _display(text: str) -> str:
    return text.replace("_", " ")


_ARITY = {"ET": 2, "RT": 4, "ED": 3}


def parse_entity_graph(stream: TextIO | str) -> EntityGraph:
    """Read an entity graph from a text stream, or from a string holding the text.

    Raises GraphParseError, carrying the offending line number, on malformed
    records, unresolved references, and edges whose endpoints do not carry the
    types declared by their relationship type.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    records: dict[str, list[tuple[int, list[str]]]] = {"ET": [], "RT": [], "EN": [], "ED": []}
    for lineno, raw in enumerate(stream, start=1):
        fields = raw.split("#", 1)[0].split()
        if not fields:
            continue
        tag, args = fields[0], fields[1:]
        if tag not in records:
            raise GraphParseError(f"unknown record tag {tag!r}", lineno)
        if tag == "EN":
            if len(args) < 3:
                raise GraphParseError("EN expects an id, a name and at least one type", lineno)
        elif len(args) != _ARITY[tag]:
            raise GraphParseError(f"{tag} expects {_ARITY[tag]} fields, got {len(args)}", lineno)
        records[tag].append((lineno, args))

    types: dict[str, EntityType] = {}
    for lineno, (tid, label) in records["ET"]:
        if tid in types:
            raise GraphParseError(f"duplicate entity type {tid!r}", lineno)
        types[tid] = EntityType(tid, _display(label))

    rels: dict[str, RelationshipType] = {}
    for lineno, (rid, label, src, dst) in records["RT"]:
        if rid in rels:
            raise GraphParseError(f"duplicate relationship type {rid!r}", lineno)
        for t in (src, dst):
            if t not in types:
                raise GraphParseError(f"undeclared entity type {t!r}", lineno)
        rels[rid] = RelationshipType(rid, _display(label), src, dst)

    entities: dict[str, Entity] = {}
    for lineno, (eid, name, *etypes) in records["EN"]:
        if eid in entities:
            raise GraphParseError(f"duplicate entity {eid!r}", lineno)
        for t in etypes:
            if t not in types:
                raise GraphParseError(f"undeclared entity type {t!r}", lineno)
        if len(set(etypes)) != len(etypes):
            raise GraphParseError(f"entity {eid!r} lists a type twice", lineno)
        entities[eid] = Entity(eid, _display(name), frozenset(etypes))

    graph = EntityGraph(types.values(), rels.values(), entities.values())
    edges: list[Edge] = []
    for lineno, (rid, src, dst) in records["ED"]:
        try:
            graph._check_edge(rid, src, dst)
        except GraphValidationError as exc:
            raise GraphParseError(str(exc), lineno) from None
        edges.append((rid, src, dst))
    return EntityGraph(types.values(), rels.values(), entities.values(), edges)


def load_entity_graph(path: str | Path) -> EntityGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_entity_graph(fh)


def fixture_text() -> str:
    """Source text of the bundled film fixture."""
    return resources.files("previewgen").joinpath("data/films.eg").read_text(encoding="utf-8")


def load_fixture() -> EntityGraph:
    return parse_entity_graph(fixture_text())


def format_entity_graph(g: EntityGraph) -> str:
    """Serialize ``g`` back into the line format (inverse of parse_entity_graph)."""

    def tok(s: str) -> str:
        return s.replace(" ", "_")

    lines = [f"ET {t.id} {tok(t.label)}" for t in sorted(g.entity_types.values(), key=lambda t: t.id)]
    lines += [
        f"RT {r.id} {tok(r.label)} {r.source} {r.target}"
        for r in sorted(g.relationship_types.values(), key=lambda r: r.id)
    ]
    lines += [
        f"EN {e.id} {tok(e.name)} {' '.join(sorted(e.types))}"
        for e in sorted(g.entities.values(), key=lambda e: e.id)
    ]
    lines += [f"ED {rid} {src} {dst}" for rid, src, dst in g.edges]
    return "\n".join(lines) + ("\n" if lines else "")


def derive_schema_graph(g: EntityGraph) -> SchemaGraph:
    """The schema graph determined by ``g``.

    Vertices are entity types with at least one entity; edges are relationship
    types with at least one instance.  Weights fold instance counts of every
    relationship type between an unordered type pair, either direction.
    """
    in_use = {t for t, ids in g.members.items() if ids}
    counts = g.edge_counts
    rels = {rid: rt for rid, rt in sorted(g.relationship_types.items()) if counts[rid] > 0}
    weights: Counter[tuple[str, str]] = Counter()
    for rid, rt in rels.items():
        pair = tuple(sorted((rt.source, rt.target)))
        weights[pair] += counts[rid]
    return SchemaGraph(
        entity_types={t: g.entity_types[t] for t in sorted(in_use)},
        relationship_types=rels,
        weights=dict(sorted(weights.items())),
    )


def incident_candidates(s: SchemaGraph, type_id: str) -> list[AttributeCandidate]:
    """Every relationship type touching ``type_id``, once per direction.

    A self-loop relationship type contributes two candidates.
    """
    if type_id not in s.entity_types:
        raise UnknownIdError(f"unknown entity type {type_id!r}")
    out = []
    for rid, rt in s.relationship_types.items():
        if rt.source == type_id:
            out.append(AttributeCandidate(type_id, rid, Direction.OUTGOING))
        if rt.target == type_id:
            out.append(AttributeCandidate(type_id, rid, Direction.INCOMING))
    out.sort(key=lambda c: c.sort_key)
    return out


class DistanceIndex:
    """Hop distances between entity types on the undirected simple projection."""

    def __init__(self, table: Mapping[str, Mapping[str, float]]) -> None:
        self._table = {a: dict(row) for a, row in table.items()}

    @property
    def type_ids(self) -> list[str]:
        return sorted(self._table)

    def __call__(self, a: str, b: str) -> float:
        try:
            return self._table[a][b]
        except KeyError:
            raise UnknownIdError(f"unknown entity type pair ({a!r}, {b!r})") from None

    def diameter(self) -> float:
        """Largest finite distance (0 for an empty or edgeless graph)."""
        finite = [d for row in self._table.values() for d in row.values() if d != UNREACHABLE]
        return max(finite, default=0)


def undirected_adjacency(s: SchemaGraph) -> dict[str, set[str]]:
    adj: dict[str, set[str]] = {t: set() for t in s.entity_types}
    for rt in s.relationship_types.values():
        if rt.source != rt.target:
            adj[rt.source].add(rt.target)
            adj[rt.target].add(rt.source)
    return adj


def all_pairs_distance(s: SchemaGraph) -> DistanceIndex:
    adj = undirected_adjacency(s)
    table: dict[str, dict[str, float]] = {}
    for root in adj:
        dist: dict[str, float] = {root: 0}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        table[root] = {t: dist.get(t, UNREACHABLE) for t in adj}
    return DistanceIndex(table)
