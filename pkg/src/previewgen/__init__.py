"""Optimal preview tables for typed entity graphs."""

from .discovery import (
    Constraints,
    Gain,
    Mode,
    Preview,
    PreviewTable,
    all_optimal_previews,
    apriori_discover,
    brute_force,
    compute_preview_for_subset,
    discover,
    dp_concise,
    enumerate_feasible_subsets,
)
from .errors import (
    ConvergenceError,
    GraphParseError,
    GraphValidationError,
    InfeasibleError,
    PreviewError,
    SolverTimeout,
    UnknownIdError,
)
from .graph import (
    UNREACHABLE,
    AttributeCandidate,
    Direction,
    DistanceIndex,
    Entity,
    EntityGraph,
    EntityType,
    RelationshipType,
    SchemaGraph,
    all_pairs_distance,
    derive_schema_graph,
    incident_candidates,
    load_entity_graph,
    load_fixture,
    parse_entity_graph,
)
from .metrics import mean_reciprocal_rank, pearson_correlation, precision_at_k, reciprocal_rank
from .preview import MaterializedTable, materialize, materialize_preview, preview_from_json, render
from .scoring import (
    KeyMeasure,
    NonKeyMeasure,
    RandomWalkConfig,
    ScoredSchema,
    build_scored_schema,
    score_key_coverage,
    score_keys_random_walk,
    score_nonkey_coverage,
    score_nonkey_entropy,
    score_preview,
    score_table,
)

__version__ = "0.1.0"

__all__ = [
    "AttributeCandidate",
    "Constraints",
    "ConvergenceError",
    "Direction",
    "DistanceIndex",
    "Entity",
    "EntityGraph",
    "EntityType",
    "Gain",
    "GraphParseError",
    "GraphValidationError",
    "InfeasibleError",
    "KeyMeasure",
    "MaterializedTable",
    "Mode",
    "NonKeyMeasure",
    "Preview",
    "PreviewError",
    "PreviewTable",
    "RandomWalkConfig",
    "RelationshipType",
    "SchemaGraph",
    "ScoredSchema",
    "SolverTimeout",
    "UNREACHABLE",
    "UnknownIdError",
    "all_optimal_previews",
    "all_pairs_distance",
    "apriori_discover",
    "brute_force",
    "build_scored_schema",
    "compute_preview_for_subset",
    "derive_schema_graph",
    "discover",
    "dp_concise",
    "enumerate_feasible_subsets",
    "incident_candidates",
    "load_entity_graph",
    "load_fixture",
    "materialize",
    "materialize_preview",
    "mean_reciprocal_rank",
    "parse_entity_graph",
    "pearson_correlation",
    "precision_at_k",
    "preview_from_json",
    "reciprocal_rank",
    "render",
    "score_key_coverage",
    "score_keys_random_walk",
    "score_nonkey_coverage",
    "score_nonkey_entropy",
    "score_preview",
    "score_table",
]
