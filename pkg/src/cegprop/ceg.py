"""The transporter chain event graph and its basic queries."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Mapping

from .errors import InstanceTooLargeError, InvalidPathError, MalformedGraphError
from .tree import SUM_TOLERANCE, Atom

if TYPE_CHECKING:
    from .propagation import PropagationResult

SINK = "winf"


@dataclass(frozen=True)
class CegEdge:
    id: str
    source: str
    target: str
    prob: float
    label: str | None = None


@dataclass(frozen=True)
class TransporterCeg:
    """Positions joined by (possibly parallel) probability-labelled edges.

    ``positions`` lists the root first and the sink last. Outgoing edges of a
    position are ordered by their index in ``edges``; that order defines the
    vector ``pi(w)``.

    ``members`` optionally records which tree situations each position
    merges, and ``tree_edges`` maps tree edge ids to the CEG edge they were
    folded into. Neither takes part in equality.
    """

    positions: tuple[str, ...]
    edges: tuple[CegEdge, ...]
    root: str
    sink: str = SINK
    name: str | None = field(default=None, compare=False)
    members: Mapping[str, tuple[str, ...]] | None = field(default=None, compare=False)
    tree_edges: Mapping[str, str] | None = field(default=None, compare=False)

    @cached_property
    def edge_by_id(self) -> dict[str, CegEdge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def out_edges(self) -> dict[str, tuple[CegEdge, ...]]:
        out: dict[str, list[CegEdge]] = {w: [] for w in self.positions}
        for e in self.edges:
            out.setdefault(e.source, []).append(e)
        return {w: tuple(es) for w, es in out.items()}

    @cached_property
    def in_edges(self) -> dict[str, tuple[CegEdge, ...]]:
        inc: dict[str, list[CegEdge]] = {w: [] for w in self.positions}
        for e in self.edges:
            inc.setdefault(e.target, []).append(e)
        return {w: tuple(es) for w, es in inc.items()}

    @property
    def situations(self) -> list[str]:
        """Non-sink positions."""
        return [w for w in self.positions if w != self.sink]

    def pi(self, w: str) -> tuple[float, ...]:
        return tuple(e.prob for e in self.out_edges[w])

    @cached_property
    def levels(self) -> dict[str, int]:
        """Longest edge distance from the root; raises on cycles."""
        indeg = {w: len(self.in_edges[w]) for w in self.positions}
        level = {w: 0 for w in self.positions}
        queue = deque(w for w in self.positions if indeg[w] == 0)
        seen = 0
        while queue:
            w = queue.popleft()
            seen += 1
            for e in self.out_edges[w]:
                level[e.target] = max(level[e.target], level[w] + 1)
                indeg[e.target] -= 1
                if indeg[e.target] == 0:
                    queue.append(e.target)
        if seen != len(self.positions):
            raise MalformedGraphError("cycle detected in CEG")
        return level

    def topological_positions(self) -> list[str]:
        index = {w: i for i, w in enumerate(self.positions)}
        lv = self.levels
        return sorted(self.positions, key=lambda w: (lv[w], index[w]))

    def with_probs(self, probs: Mapping[str, float]) -> TransporterCeg:
        edges = tuple(
            CegEdge(e.id, e.source, e.target, probs[e.id], e.label) for e in self.edges
        )
        return TransporterCeg(
            self.positions, edges, self.root, self.sink, self.name,
            self.members, self.tree_edges,
        )


def validate_ceg(ceg: TransporterCeg) -> list[str]:
    problems: list[str] = []
    pos = set(ceg.positions)
    if len(pos) != len(ceg.positions):
        problems.append("duplicate position ids")
    ids = [e.id for e in ceg.edges]
    if len(set(ids)) != len(ids):
        problems.append("duplicate edge ids")
    if ceg.root not in pos:
        problems.append(f"root {ceg.root} is not a position")
    if ceg.sink not in pos:
        problems.append(f"sink {ceg.sink} is not a position")
    for e in ceg.edges:
        if e.source not in pos or e.target not in pos:
            problems.append(f"edge {e.id} references an unknown position")
        if not (0.0 <= e.prob <= 1.0) or math.isnan(e.prob):
            problems.append(f"edge {e.id} probability {e.prob!r} outside [0, 1]")
    if problems:
        return problems

    if ceg.in_edges[ceg.root]:
        problems.append("root has incoming edges")
    if ceg.out_edges[ceg.sink]:
        problems.append("sink has outgoing edges")
    for w in ceg.situations:
        out = ceg.out_edges[w]
        if not out:
            problems.append(f"position {w} has no outgoing edges")
            continue
        total = math.fsum(e.prob for e in out)
        if abs(total - 1.0) > SUM_TOLERANCE:
            problems.append(f"out-probabilities sum {total!r} != 1 at position {w}")
    for w in ceg.positions:
        if w != ceg.root and not ceg.in_edges[w]:
            problems.append(f"position {w} has no incoming edges")
    try:
        ceg.levels
    except MalformedGraphError as exc:
        problems.append(str(exc))
        return problems

    forward = _reachable(ceg, ceg.root, forward=True)
    backward = _reachable(ceg, ceg.sink, forward=False)
    for w in ceg.positions:
        if w not in forward or w not in backward:
            problems.append(f"position {w} is not on any root-to-sink path")
    return problems


def _reachable(ceg: TransporterCeg, start: str, forward: bool) -> set[str]:
    seen = {start}
    stack = [start]
    while stack:
        w = stack.pop()
        nxt = (
            [e.target for e in ceg.out_edges[w]]
            if forward
            else [e.source for e in ceg.in_edges[w]]
        )
        for u in nxt:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return seen


@dataclass(frozen=True)
class EdgeOrdering:
    edges: tuple[str, ...]
    positions: tuple[str, ...]


def topological_edge_order(ceg: TransporterCeg) -> EdgeOrdering:
    """Order edges so that none lies downstream of a later one.

    Positions are levelled by longest distance from the root; edges inherit
    the level of their source. Ties fall back to the stored order.
    """
    lv = ceg.levels
    edge_index = {e.id: i for i, e in enumerate(ceg.edges)}
    edges = sorted(ceg.edges, key=lambda e: (lv[e.source], edge_index[e.id]))
    positions = [w for w in ceg.topological_positions() if w != ceg.sink]
    return EdgeOrdering(tuple(e.id for e in edges), tuple(positions))


def enumerate_paths(ceg: TransporterCeg, cap: int | None = None) -> list[Atom]:
    """All root-to-sink paths, depth first in stored edge order."""
    paths: list[Atom] = []
    stack: list[tuple[str, Atom]] = [(ceg.root, ())]
    while stack:
        w, prefix = stack.pop()
        if w == ceg.sink:
            paths.append(prefix)
            if cap is not None and len(paths) > cap:
                raise InstanceTooLargeError(f"more than {cap} root-to-sink paths")
            continue
        for e in reversed(ceg.out_edges[w]):
            stack.append((e.target, prefix + (e.id,)))
    return paths


def count_paths(ceg: TransporterCeg) -> int:
    counts = {ceg.sink: 1}
    for w in reversed(ceg.topological_positions()):
        if w != ceg.sink:
            counts[w] = sum(counts[e.target] for e in ceg.out_edges[w])
    return counts[ceg.root]


def path_positions(ceg: TransporterCeg, path: Atom) -> list[str]:
    """Positions visited by ``path``, root first and sink last."""
    w = ceg.root
    visited = [w]
    for eid in path:
        e = ceg.edge_by_id.get(eid)
        if e is None or e.source != w:
            raise InvalidPathError(f"{eid} does not continue the path at {w}")
        w = e.target
        visited.append(w)
    if w != ceg.sink:
        raise InvalidPathError(f"path ends at {w}, not the sink")
    return visited


def path_probability(ceg: TransporterCeg, path: Atom) -> float:
    path_positions(ceg, path)
    p = 1.0
    for eid in path:
        p *= ceg.edge_by_id[eid].prob
    return p


def reach_probabilities(
    ceg: TransporterCeg, probs: Mapping[str, float] | None = None
) -> dict[str, float]:
    """Probability of passing through each position, by forward DP.

    ``probs`` overrides the edge probabilities (used with revised values).
    """
    reach = {w: 0.0 for w in ceg.positions}
    reach[ceg.root] = 1.0
    for w in ceg.topological_positions():
        if w == ceg.root:
            continue
        reach[w] = math.fsum(
            reach[e.source] * (e.prob if probs is None else probs[e.id])
            for e in ceg.in_edges[w]
        )
    return reach


def reach_probability(ceg: TransporterCeg, w: str) -> float:
    if w not in ceg.out_edges:
        raise KeyError(f"unknown position {w}")
    return reach_probabilities(ceg)[w]


def _fmt(x: float) -> str:
    return format(x, ".6g")


def export_dot(ceg: TransporterCeg, annotations: PropagationResult | None = None) -> str:
    """Graphviz text for the CEG; deterministic for identical inputs."""
    title = ceg.name or "ceg"
    lines = [f'digraph "{title}" {{', "  rankdir=LR;"]
    for w in ceg.positions:
        attrs = [f'label="{w}'
                 + (f"\\nphi={_fmt(annotations.phi[w])}" if annotations else "")
                 + '"']
        if w == ceg.sink:
            attrs.append("shape=doublecircle")
        lines.append(f'  "{w}" [{", ".join(attrs)}];')
    for e in ceg.edges:
        text = f"{e.id}: {_fmt(e.prob)}"
        if annotations is not None:
            text += (
                f"\\ntau={_fmt(annotations.tau[e.id])}"
                f"\\npi_hat={_fmt(annotations.pi_hat[e.id])}"
            )
        if e.label:
            text += "\\n" + e.label.replace('"', '\\"')
        lines.append(f'  "{e.source}" -> "{e.target}" [label="{text}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
