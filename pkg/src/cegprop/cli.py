"""Command line interface: build, propagate, query, bench, example."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import io, oracle, reference
from .ceg import count_paths, export_dot, path_probability, reach_probability
from .errors import (
    CegError,
    IncompatibleObservationError,
    InvalidPathError,
    ObservationError,
    ValidationError,
    ZeroProbabilityError,
)
from .observation import from_edge_union
from .positions import build_transporter_ceg, minimize_ceg
from .propagation import (
    conditional_atom_probability,
    conditional_reach_probability,
    propagate,
    reduce,
)
from .tree import ProbabilityTree

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INCOMPATIBLE = 3
EXIT_ZERO_PROBABILITY = 4
EXIT_IO = 5


class CliFailure(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code = code
        self.kind = kind


def _load_ceg(path: str):
    model = io.model_from_json(io.read_json(path))
    if isinstance(model, ProbabilityTree):
        return build_transporter_ceg(model)
    return model


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def cmd_build(args) -> int:
    model = io.model_from_json(io.read_json(args.model))
    if isinstance(model, ProbabilityTree):
        ceg = build_transporter_ceg(
            model, match_labels=not args.ignore_labels, tolerance=args.tolerance
        )
    else:
        ceg = model
    _write(Path(args.output), io.dumps(io.ceg_to_json(ceg)))
    print(
        f"positions: {len(ceg.positions)} (incl. sink), "
        f"edges: {len(ceg.edges)}, atoms: {count_paths(ceg)}"
    )
    return EXIT_OK


def cmd_propagate(args) -> int:
    ceg = _load_ceg(args.ceg)
    obs = io.observation_from_json(io.read_json(args.observation), ceg)
    result = propagate(ceg, obs)
    prefix = args.output
    _write(Path(prefix + ".json"), io.dumps(io.result_to_json(result)))
    written = [prefix + ".json"]
    if args.reduce or args.minimize:
        reduced = reduce(ceg, result).ceg
        if args.minimize:
            reduced = minimize_ceg(reduced)
            suffix = ".minimized.json"
        else:
            suffix = ".reduced.json"
        _write(Path(prefix + suffix), io.dumps(io.ceg_to_json(reduced)))
        written.append(prefix + suffix)
    if args.dot:
        _write(Path(prefix + ".dot"), export_dot(ceg, result))
        written.append(prefix + ".dot")
    print(f"event probability: {result.event_probability:.12g}")
    if args.counts:
        c = result.counters
        print(f"backward edge ops: {c.backward_edge_ops}")
        print(f"backward vertex ops: {c.backward_vertex_ops}")
        print(f"forward edge ops: {c.forward_edge_ops}")
        print(f"total ops: {c.total}")
    print("wrote " + ", ".join(written))
    return EXIT_OK


def cmd_query(args) -> int:
    ceg = _load_ceg(args.ceg)
    result = None
    if args.result:
        result = io.result_from_json(io.read_json(args.result), ceg)
    if args.kind == "atom":
        value = path_probability(ceg, tuple(args.ids))
    elif args.kind == "reach":
        if len(args.ids) != 1:
            raise CliFailure(EXIT_VALIDATION, "validation", "reach takes one position id")
        w = args.ids[0]
        if w not in ceg.out_edges:
            raise CliFailure(EXIT_VALIDATION, "validation", f"unknown position {w}")
        value = (
            conditional_reach_probability(ceg, result, w) if result
            else reach_probability(ceg, w)
        )
    else:
        if result is None:
            raise CliFailure(EXIT_VALIDATION, "validation",
                             "conditional-atom needs --result")
        value = conditional_atom_probability(result, tuple(args.ids))
    print(format(value, ".12g"))
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.family == "example1":
        report = oracle.example1_bench()
    elif args.family == "model-selection":
        report = oracle.model_selection_bench(args.n, args.seed)
    else:
        params = oracle.TreeParams(args.max_depth, args.max_branch, args.merge_bias)
        report = oracle.random_bench(args.seed, params)
    if args.json:
        _write(Path(args.json), report.to_json(include_time=False) + "\n")
    print(report.to_text())
    return EXIT_OK if all(report.checks.values()) else EXIT_VALIDATION


def cmd_example(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tree = reference.example1_tree()
    ceg = build_transporter_ceg(tree)
    _write(out / "example1.json", io.dumps(io.tree_to_json(
        tree, "Treatment regime for a serious medical condition")))
    _write(out / "example2_observation.json", io.dumps(io.observation_to_json(
        ceg, from_edge_union(ceg, reference.EXAMPLE2_EDGES))))
    print(f"wrote {out / 'example1.json'}, {out / 'example2_observation.json'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cegprop", description="Exact propagation on chain event graphs."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build the transporter CEG of a model file")
    p.add_argument("model")
    p.add_argument("-o", "--output", default="ceg.json")
    p.add_argument("--ignore-labels", action="store_true",
                   help="merge situations on probabilities alone")
    p.add_argument("--tolerance", type=float, default=0.0,
                   help="probability grid for merging (0 = exact)")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("propagate", help="condition a CEG on an observation")
    p.add_argument("ceg")
    p.add_argument("observation")
    p.add_argument("-o", "--output", default="result", help="output path prefix")
    p.add_argument("--reduce", action="store_true", help="write the reduced CEG")
    p.add_argument("--minimize", action="store_true",
                   help="write the reduced CEG after merging equivalent positions")
    p.add_argument("--dot", action="store_true", help="write annotated DOT")
    p.add_argument("--counts", action="store_true", help="print operation counters")
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("query", help="atom, reach or conditional-atom probability")
    p.add_argument("ceg")
    p.add_argument("kind", choices=["atom", "reach", "conditional-atom"])
    p.add_argument("ids", nargs="+", help="edge ids of a path, or one position id")
    p.add_argument("--result", help="propagation result file")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("bench", help="operation counts for a model family")
    p.add_argument("family", choices=["example1", "model-selection", "random"])
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--seed", type=int, default=int(os.environ.get("CEG_SEED", "0")))
    p.add_argument("--max-depth", type=int, default=4)
    p.add_argument("--max-branch", type=int, default=3)
    p.add_argument("--merge-bias", type=float, default=0.5)
    p.add_argument("--json", help="also write the report as JSON")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("example", help="write the worked example model files")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_example)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliFailure as exc:
        failure = exc
    except ZeroProbabilityError as exc:
        failure = CliFailure(EXIT_ZERO_PROBABILITY, "zero-probability", str(exc))
    except (IncompatibleObservationError, ObservationError) as exc:
        failure = CliFailure(EXIT_INCOMPATIBLE, "incompatible-observation", str(exc))
    except (ValidationError, InvalidPathError, KeyError, ValueError) as exc:
        failure = CliFailure(EXIT_VALIDATION, "validation", str(exc).strip("'\""))
    except OSError as exc:
        failure = CliFailure(EXIT_IO, "io", str(exc))
    except CegError as exc:
        failure = CliFailure(EXIT_VALIDATION, "error", str(exc))
    message = " ".join(str(failure).split())
    print(f"error[{failure.kind}]: {message}", file=sys.stderr)
    return failure.code


if __name__ == "__main__":
    sys.exit(main())
