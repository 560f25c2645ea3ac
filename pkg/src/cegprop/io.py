"""JSON model, observation and result files.

Probabilities are written as decimal strings (shortest round-tripping
``repr`` of the float) so that serialise -> parse -> serialise is
byte-identical. Numbers are also accepted on input.
"""

from __future__ import annotations

import json
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Any

from .ceg import CegEdge, TransporterCeg, validate_ceg
from .errors import IncompatibleObservationError, ValidationError
from .observation import (
    CompatibleObservation,
    Incompatible,
    check_compatibility,
    from_edge_sets,
    from_edge_union,
)
from .propagation import OperationCounters, PropagationResult
from .tree import ProbabilityTree, TreeEdge, validate_tree

FORMAT_VERSION = 1
MODEL_FORMAT = "cegprop-model"
OBSERVATION_FORMAT = "cegprop-observation"
RESULT_FORMAT = "cegprop-result"


def parse_prob(value: Any, where: str) -> float:
    if isinstance(value, bool):
        raise ValidationError(f"{where}: probability must be a number or decimal string")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            Decimal(value)
        except InvalidOperation:
            raise ValidationError(f"{where}: {value!r} is not a decimal number") from None
        return float(value)
    raise ValidationError(f"{where}: probability must be a number or decimal string")


def format_prob(p: float) -> str:
    return repr(float(p))


def dumps(data: dict) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def read_json(path: str | Path) -> dict:
    """Read a JSON document; OSError propagates, bad JSON is a ValidationError."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top level must be an object")
    return data


def _expect(data: dict, fmt: str) -> None:
    if data.get("format") != fmt:
        raise ValidationError(f"expected format {fmt!r}, got {data.get('format')!r}")
    if data.get("version") != FORMAT_VERSION:
        raise ValidationError(f"unsupported version {data.get('version')!r}")


def _field(obj: dict, key: str, where: str):
    try:
        return obj[key]
    except (KeyError, TypeError):
        raise ValidationError(f"{where}: missing field {key!r}") from None


# ---------------------------------------------------------------- models

def _edge_json(e: TreeEdge | CegEdge) -> dict:
    out = {"id": e.id, "source": e.source, "target": e.target, "prob": format_prob(e.prob)}
    if e.label is not None:
        out["label"] = e.label
    return out


def _metadata(name: str | None, description: str | None) -> dict:
    meta: dict[str, str] = {}
    if name is not None:
        meta["name"] = name
    if description is not None:
        meta["description"] = description
    return meta


def tree_to_json(tree: ProbabilityTree, description: str | None = None) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": FORMAT_VERSION,
        "metadata": _metadata(tree.name, description),
        "tree": {
            "vertices": list(tree.vertices),
            "edges": [_edge_json(e) for e in tree.edges],
        },
    }


def ceg_to_json(ceg: TransporterCeg, description: str | None = None) -> dict:
    body: dict[str, Any] = {
        "root": ceg.root,
        "sink": ceg.sink,
        "positions": list(ceg.positions),
        "edges": [_edge_json(e) for e in ceg.edges],
        "pi": {w: [format_prob(p) for p in ceg.pi(w)] for w in ceg.situations},
    }
    if ceg.members is not None:
        body["members"] = {w: list(vs) for w, vs in ceg.members.items()}
    if ceg.tree_edges is not None:
        body["tree_edges"] = dict(ceg.tree_edges)
    return {
        "format": MODEL_FORMAT,
        "version": FORMAT_VERSION,
        "metadata": _metadata(ceg.name, description),
        "ceg": body,
    }


def _parse_edges(raw, where: str, cls):
    if not isinstance(raw, list):
        raise ValidationError(f"{where}: edges must be a list")
    edges = []
    for i, item in enumerate(raw):
        at = f"{where}.edges[{i}]"
        label = item.get("label") if isinstance(item, dict) else None
        edges.append(cls(
            str(_field(item, "id", at)),
            str(_field(item, "source", at)),
            str(_field(item, "target", at)),
            parse_prob(_field(item, "prob", at), at),
            label,
        ))
    return edges


def model_from_json(data: dict) -> ProbabilityTree | TransporterCeg:
    """Parse and validate a model document holding either a tree or a CEG."""
    _expect(data, MODEL_FORMAT)
    meta = data.get("metadata") or {}
    name = meta.get("name")
    if ("tree" in data) == ("ceg" in data):
        raise ValidationError("model must contain exactly one of 'tree' or 'ceg'")
    if "tree" in data:
        body = data["tree"]
        edges = _parse_edges(_field(body, "edges", "tree"), "tree", TreeEdge)
        vertices = body.get("vertices")
        tree = ProbabilityTree.from_edges(edges, vertices, name=name)
        problems = validate_tree(tree)
        if problems:
            raise ValidationError("; ".join(problems))
        return tree

    body = data["ceg"]
    edges = _parse_edges(_field(body, "edges", "ceg"), "ceg", CegEdge)
    ceg = TransporterCeg(
        positions=tuple(_field(body, "positions", "ceg")),
        edges=tuple(edges),
        root=_field(body, "root", "ceg"),
        sink=_field(body, "sink", "ceg"),
        name=name,
        members={w: tuple(vs) for w, vs in body["members"].items()}
        if "members" in body else None,
        tree_edges=dict(body["tree_edges"]) if "tree_edges" in body else None,
    )
    problems = validate_ceg(ceg)
    if problems:
        raise ValidationError("; ".join(problems))
    for w, vec in (body.get("pi") or {}).items():
        if w not in ceg.out_edges:
            raise ValidationError(f"pi given for unknown position {w}")
        given = tuple(parse_prob(p, f"ceg.pi.{w}") for p in vec)
        if given != ceg.pi(w):
            raise ValidationError(f"pi vector for {w} disagrees with its edges")
    return ceg


# ---------------------------------------------------------------- observations

def observation_to_json(
    ceg: TransporterCeg, obs: CompatibleObservation, per_position: bool = False
) -> dict:
    out: dict[str, Any] = {"format": OBSERVATION_FORMAT, "version": FORMAT_VERSION}
    if ceg.name is not None:
        out["model"] = ceg.name
    if per_position:
        out["positions"] = {
            w: [e.id for e in ceg.out_edges[w] if e.id in obs.per_position[w]]
            for w in ceg.situations
        }
    else:
        out["edges"] = [e.id for e in ceg.edges if e.id in obs.union]
    return out


def observation_from_json(data: dict, ceg: TransporterCeg) -> CompatibleObservation:
    """Parse an observation in union, per-position or explicit-path form.

    Path lists are accepted only if they are compatible; otherwise an
    :class:`IncompatibleObservationError` carries the witness path.
    """
    _expect(data, OBSERVATION_FORMAT)
    model = data.get("model")
    if model is not None and ceg.name is not None and model != ceg.name:
        raise ValidationError(f"observation refers to model {model!r}, not {ceg.name!r}")
    forms = [k for k in ("edges", "positions", "paths") if k in data]
    if len(forms) != 1:
        raise ValidationError("observation needs exactly one of 'edges', 'positions', 'paths'")
    if "edges" in data:
        return from_edge_union(ceg, data["edges"])
    if "positions" in data:
        return from_edge_sets(ceg, data["positions"])
    found = check_compatibility(ceg, [tuple(p) for p in data["paths"]])
    if isinstance(found, Incompatible):
        raise IncompatibleObservationError(
            "path set is not compatible; witness " + ",".join(found.witness),
            witness=found.witness,
        )
    return found


# ---------------------------------------------------------------- results

def result_to_json(result: PropagationResult) -> dict:
    ceg = result.ceg
    c = result.counters
    out: dict[str, Any] = {"format": RESULT_FORMAT, "version": FORMAT_VERSION}
    if ceg.name is not None:
        out["model"] = ceg.name
    out.update({
        "observation": [e.id for e in ceg.edges if e.id in result.observation.union],
        "event_probability": format_prob(result.event_probability),
        "counters": {
            "backward_edge_ops": c.backward_edge_ops,
            "backward_vertex_ops": c.backward_vertex_ops,
            "forward_edge_ops": c.forward_edge_ops,
        },
        "positions": [{"id": w, "phi": format_prob(result.phi[w])} for w in ceg.positions],
        "edges": [
            {
                "id": e.id,
                "prob": format_prob(e.prob),
                "tau": format_prob(result.tau[e.id]),
                "pi_hat": format_prob(result.pi_hat[e.id]),
            }
            for e in ceg.edges
        ],
    })
    return out


def result_from_json(data: dict, ceg: TransporterCeg) -> PropagationResult:
    _expect(data, RESULT_FORMAT)
    obs = from_edge_union(ceg, _field(data, "observation", "result"))
    phi = {}
    for item in _field(data, "positions", "result"):
        phi[item["id"]] = parse_prob(item["phi"], f"result.phi.{item['id']}")
    tau, pi_hat = {}, {}
    for item in _field(data, "edges", "result"):
        eid = item["id"]
        tau[eid] = parse_prob(item["tau"], f"result.tau.{eid}")
        pi_hat[eid] = parse_prob(item["pi_hat"], f"result.pi_hat.{eid}")
    if set(phi) != set(ceg.positions) or set(tau) != set(ceg.edge_by_id):
        raise ValidationError("result does not match the CEG's positions and edges")
    counters = OperationCounters(**_field(data, "counters", "result"))
    return PropagationResult(tau, phi, pi_hat, counters, obs, ceg)
