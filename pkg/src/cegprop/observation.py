"""Observations expressible as per-position edge subsets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .ceg import TransporterCeg, path_positions
from .errors import ObservationError
from .tree import Atom


@dataclass(frozen=True)
class CompatibleObservation:
    """Allowed outgoing edges at every non-sink position.

    A path belongs to the observed event when each of its edges is allowed.
    """

    per_position: Mapping[str, frozenset[str]]

    @property
    def union(self) -> frozenset[str]:
        return frozenset().union(*self.per_position.values())

    def is_vacuous(self, ceg: TransporterCeg) -> bool:
        return self.union == frozenset(e.id for e in ceg.edges)


@dataclass(frozen=True)
class Incompatible:
    """A path set that no per-position edge subsets describe exactly.

    ``witness`` is admitted by the edge subsets the path set induces but is
    not itself in the path set.
    """

    witness: Atom
    induced: CompatibleObservation


def from_edge_sets(
    ceg: TransporterCeg, sets: Mapping[str, Iterable[str]]
) -> CompatibleObservation:
    """Build an observation; positions missing from ``sets`` allow every edge."""
    per_position = {}
    for w in ceg.situations:
        allowed = {e.id for e in ceg.out_edges[w]}
        if w not in sets:
            per_position[w] = frozenset(allowed)
            continue
        chosen = frozenset(sets[w])
        stray = chosen - allowed
        if stray:
            raise ObservationError(
                f"edges {sorted(stray)} do not leave position {w}"
            )
        per_position[w] = chosen
    unknown = set(sets) - set(ceg.situations)
    if unknown:
        raise ObservationError(f"unknown or sink positions {sorted(unknown)}")
    return CompatibleObservation(per_position)


def from_edge_union(ceg: TransporterCeg, edges: Iterable[str]) -> CompatibleObservation:
    """Build an observation from the union of allowed edges.

    Unlike :func:`from_edge_sets` nothing defaults to allowed: a position none
    of whose edges are listed admits no path.
    """
    chosen = set(edges)
    unknown = chosen - set(ceg.edge_by_id)
    if unknown:
        raise ObservationError(f"unknown edges {sorted(unknown)}")
    return CompatibleObservation(
        {
            w: frozenset(e.id for e in ceg.out_edges[w] if e.id in chosen)
            for w in ceg.situations
        }
    )


def vacuous(ceg: TransporterCeg) -> CompatibleObservation:
    return from_edge_sets(ceg, {})


def paths_of(ceg: TransporterCeg, obs: CompatibleObservation) -> list[Atom]:
    """Root-to-sink paths using only allowed edges, in stored edge order."""
    allowed = obs.union
    paths: list[Atom] = []
    stack: list[tuple[str, Atom]] = [(ceg.root, ())]
    while stack:
        w, prefix = stack.pop()
        if w == ceg.sink:
            paths.append(prefix)
            continue
        for e in reversed(ceg.out_edges[w]):
            if e.id in allowed:
                stack.append((e.target, prefix + (e.id,)))
    return paths


def check_compatibility(
    ceg: TransporterCeg, paths: Iterable[Atom]
) -> CompatibleObservation | Incompatible:
    """Decide whether ``paths`` is exactly the event of some edge subsets.

    The candidate subsets are the edges each position contributes to the
    given paths; the set is compatible iff those subsets admit nothing else.
    """
    given = set()
    used: dict[str, set[str]] = {w: set() for w in ceg.situations}
    for path in paths:
        path = tuple(path)
        visited = path_positions(ceg, path)
        for w, eid in zip(visited, path):
            used[w].add(eid)
        given.add(path)
    obs = CompatibleObservation({w: frozenset(s) for w, s in used.items()})
    for path in paths_of(ceg, obs):
        if path not in given:
            return Incompatible(path, obs)
    return obs
