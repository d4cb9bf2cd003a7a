"""Command-line entry point: entity graph file in, preview tables out.

Exit codes::

    0  success
    2  usage error (bad or incompatible flags)
    3  input file cannot be read
    4  input file is malformed
    5  no preview satisfies the constraints
    6  random-walk scoring did not converge
    1  any other failure

Errors are reported on stderr as one JSON object per line, e.g.
``{"error": "parse", "exit": 4, "message": "...", "line": 7}``.
Diagnostics (sizes, phase timings) also go to stderr; stdout only carries the
rendered preview.  ``PREVIEWGEN_LOG`` sets the diagnostic log level.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Sequence

from .discovery import Constraints, Gain, Mode, apriori_discover, brute_force, dp_concise
from .errors import ConvergenceError, GraphParseError, InfeasibleError, PreviewError
from .graph import AttributeCandidate, Direction, derive_schema_graph, fixture_text, parse_entity_graph
from .preview import materialize_preview, render
from .scoring import KeyMeasure, NonKeyMeasure, RandomWalkConfig, ScoredSchema, build_scored_schema

log = logging.getLogger("previewgen")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_FILE = 3
EXIT_PARSE = 4
EXIT_INFEASIBLE = 5
EXIT_CONVERGENCE = 6


class UsageError(Exception):
    pass


def _emit_error(kind: str, code: int, message: str, **extra: object) -> int:
    sys.stderr.write(json.dumps({"error": kind, "exit": code, "message": message, **extra}) + "\n")
    return code


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # one-line errors instead of usage dumps
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="previewgen", description="Generate optimal preview tables for an entity graph.")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", "-i", metavar="PATH", help="entity graph file ('-' reads stdin)")
    src.add_argument("--fixture", action="store_true", help="use the bundled film example graph")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="concise")
    p.add_argument("-k", type=int, required=True, help="number of preview tables")
    p.add_argument("-n", type=int, required=True, help="total non-key attribute budget")
    p.add_argument("-d", type=int, help="distance bound (required for tight/diverse)")
    p.add_argument("--key", choices=[m.value for m in KeyMeasure], default="coverage")
    p.add_argument("--nonkey", choices=[m.value for m in NonKeyMeasure], default="coverage")
    p.add_argument("--algorithm", choices=["auto", "brute", "dp", "apriori"], default="auto")
    p.add_argument("--gain", choices=[g.value for g in Gain], default="weighted",
                   help="rank leftover non-key slots by key-weighted (default) or raw scores")
    p.add_argument("--tuples", type=int, default=3, help="sampled rows per table")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["json", "markdown"], default="json")
    p.add_argument("--teleport", type=float, default=RandomWalkConfig.teleport)
    p.add_argument("--tolerance", type=float, default=RandomWalkConfig.tolerance)
    p.add_argument("--cache", action="store_true", help="reuse scores from a sidecar file next to the input")
    p.add_argument("--emit-timings", action="store_true", help="print per-phase timings to stderr")
    return p


def validate(args: argparse.Namespace) -> Constraints:
    mode = Mode(args.mode)
    if mode is Mode.CONCISE and args.d is not None:
        raise UsageError("-d only applies to --mode tight or diverse")
    if mode is not Mode.CONCISE and args.d is None:
        raise UsageError(f"--mode {mode.value} requires -d")
    if args.algorithm == "dp" and mode is not Mode.CONCISE:
        raise UsageError("--algorithm dp only supports --mode concise")
    if args.algorithm == "apriori" and mode is Mode.CONCISE:
        raise UsageError("--algorithm apriori requires --mode tight or diverse")
    if args.gain == "raw" and args.algorithm in ("auto", "dp") and mode is Mode.CONCISE:
        raise UsageError("--gain raw needs --algorithm brute for concise previews")
    if args.tuples < 1:
        raise UsageError("--tuples must be positive")
    if args.cache and not args.input or args.cache and args.input == "-":
        raise UsageError("--cache needs --input pointing at a file")
    try:
        RandomWalkConfig(args.teleport, args.tolerance)
        return Constraints(args.k, args.n, mode, args.d)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


@contextmanager
def _phase(name: str, timings: dict[str, float]) -> Iterator[None]:
    start = time.perf_counter()
    yield
    timings[name] = (time.perf_counter() - start) * 1000


def _cache_key(text: str, args: argparse.Namespace) -> str:
    h = hashlib.sha256(text.encode("utf-8"))
    h.update(json.dumps([args.key, args.nonkey, args.teleport, args.tolerance]).encode())
    return h.hexdigest()


def _cache_path(input_path: str) -> Path:
    return Path(input_path).with_name(Path(input_path).name + ".scores.json")


def _load_cached(path: Path, key: str, schema) -> ScoredSchema | None:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        entry = data[key]
    except (OSError, ValueError, KeyError):
        return None
    nonkey = {
        AttributeCandidate(t, e, Direction(d)): s for t, e, d, s in entry["nonkey_scores"]
    }
    return ScoredSchema.from_scores(schema, entry["key_scores"], nonkey, entry["key_measure"], entry["nonkey_measure"])


def _store_cached(path: Path, key: str, scored: ScoredSchema) -> None:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError):
        data = {}
    data[key] = {
        "key_measure": scored.key_measure,
        "nonkey_measure": scored.nonkey_measure,
        "key_scores": dict(scored.key_scores),
        "nonkey_scores": [[c.key_type, c.edge_type, c.direction.value, s] for c, s in scored.nonkey_scores.items()],
    }
    path.write_text(json.dumps(data, sort_keys=True), encoding="utf-8")


def run(args: argparse.Namespace) -> str:
    """Execute a validated configuration and return the rendered preview."""
    c = validate(args)
    timings: dict[str, float] = {}
    with _phase("read", timings):
        if args.fixture:
            text = fixture_text()
        elif args.input == "-":
            text = sys.stdin.read()
        else:
            with open(args.input, encoding="utf-8") as fh:
                text = fh.read()
    with _phase("parse", timings):
        g = parse_entity_graph(text)
        schema = derive_schema_graph(g)
    log.info("entity graph: %d entities, %d edges; schema: %d types, %d relationship types",
             len(g.entities), len(g.edges), len(schema.entity_types), len(schema.relationship_types))
    with _phase("score", timings):
        scored = None
        if args.cache:
            path, key = _cache_path(args.input), _cache_key(text, args)
            scored = _load_cached(path, key, schema)
            log.info("score cache %s", "hit" if scored else "miss")
        if scored is None:
            cfg = RandomWalkConfig(args.teleport, args.tolerance)
            scored = build_scored_schema(g, schema, args.key, args.nonkey, cfg)
            if args.cache:
                _store_cached(path, key, scored)
    algorithm = args.algorithm
    if algorithm == "auto":
        algorithm = "dp" if c.mode is Mode.CONCISE else "apriori"
    with _phase("discover", timings):
        if algorithm == "brute":
            preview = brute_force(scored, c, gain=args.gain)
        elif algorithm == "dp":
            preview = dp_concise(scored, c.k, c.n)
        else:
            preview = apriori_discover(scored, c, gain=args.gain)
    with _phase("render", timings):
        tables = materialize_preview(g, preview, args.tuples, args.seed)
        out = render(preview, tables, args.format, constraints=c,
                     measures={"key": args.key, "nonkey": args.nonkey})
    log.info("algorithm %s, total score %g", algorithm, preview.total_score)
    if args.emit_timings:
        sys.stderr.write(json.dumps({"timings_ms": {k: round(v, 3) for k, v in timings.items()}}) + "\n")
    return out


def main(argv: Sequence[str] | None = None) -> int:
    level = os.environ.get("PREVIEWGEN_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        out = run(args)
    except UsageError as exc:
        return _emit_error("usage", EXIT_USAGE, str(exc))
    except OSError as exc:
        return _emit_error("file", EXIT_FILE, f"{exc.strerror or exc}: {exc.filename or ''}".rstrip(": "))
    except UnicodeDecodeError as exc:
        return _emit_error("file", EXIT_FILE, f"input is not UTF-8: {exc.reason}")
    except GraphParseError as exc:
        return _emit_error("parse", EXIT_PARSE, exc.reason, line=exc.line)
    except InfeasibleError as exc:
        return _emit_error("infeasible", EXIT_INFEASIBLE, str(exc))
    except ConvergenceError as exc:
        return _emit_error("convergence", EXIT_CONVERGENCE, str(exc), residual=exc.residual)
    except (PreviewError, ValueError) as exc:
        return _emit_error("internal", EXIT_INTERNAL, str(exc))
    sys.stdout.write(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
