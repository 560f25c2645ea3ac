"""Collect/distribute propagation of a compatible observation on a CEG.

The collect pass visits positions children-first. Each edge gets a potential
``tau = pi_e * phi(target)`` if allowed by the observation and 0 otherwise, and
each position's emphasis ``phi`` is the sum of its edge potentials, with
``phi(sink) = 1``. The distribute pass divides each allowed potential by the
emphasis of its source to give the revised probabilities ``pi_hat``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .ceg import CegEdge, TransporterCeg, path_positions, reach_probabilities
from .errors import ZeroProbabilityError
from .observation import CompatibleObservation
from .tree import Atom

INVARIANCE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class OperationCounters:
    """Arithmetic work done by a propagation.

    backward_edge_ops: edges visited in collect (product or zero assignment).
    backward_vertex_ops: emphasis sums over positions with at least one
        allowed outgoing edge, i.e. where a product was actually formed.
    forward_edge_ops: divisions performed in distribute.
    """

    backward_edge_ops: int = 0
    backward_vertex_ops: int = 0
    forward_edge_ops: int = 0

    def __add__(self, other: OperationCounters) -> OperationCounters:
        return OperationCounters(
            self.backward_edge_ops + other.backward_edge_ops,
            self.backward_vertex_ops + other.backward_vertex_ops,
            self.forward_edge_ops + other.forward_edge_ops,
        )

    @property
    def total(self) -> int:
        return self.backward_edge_ops + self.backward_vertex_ops + self.forward_edge_ops


@dataclass(frozen=True)
class CollectResult:
    tau: dict[str, float]
    phi: dict[str, float]
    counters: OperationCounters


@dataclass(frozen=True)
class PropagationResult:
    tau: dict[str, float]
    phi: dict[str, float]
    pi_hat: dict[str, float]
    counters: OperationCounters
    observation: CompatibleObservation
    ceg: TransporterCeg = field(repr=False, compare=False)

    @property
    def event_probability(self) -> float:
        """Prior probability of the observed event, i.e. the root emphasis."""
        return self.phi[self.ceg.root]


@dataclass(frozen=True)
class ReducedCeg:
    """Support of the conditioned model; ``position_map`` points back into the source CEG."""

    ceg: TransporterCeg
    position_map: dict[str, str]


def accommodation_order(ceg: TransporterCeg) -> list[str]:
    """Non-sink positions, every child ahead of its parents."""
    return [w for w in reversed(ceg.topological_positions()) if w != ceg.sink]


def collect(
    ceg: TransporterCeg,
    obs: CompatibleObservation,
    order: Sequence[str] | None = None,
) -> CollectResult:
    """Backward pass computing edge potentials and position emphases.

    ``order`` may supply any accommodation order (children first); it is
    checked, not trusted.
    """
    if order is None:
        order = accommodation_order(ceg)
    elif sorted(order) != sorted(ceg.situations):
        raise ValueError("order must list every non-sink position exactly once")
    allowed = obs.union
    tau: dict[str, float] = {}
    phi: dict[str, float] = {ceg.sink: 1.0}
    edge_ops = vertex_ops = 0
    for w in order:
        products = 0
        for e in ceg.out_edges[w]:
            if e.target not in phi:
                raise ValueError(f"{w} visited before its child {e.target}")
            edge_ops += 1
            if e.id in allowed:
                tau[e.id] = e.prob * phi[e.target]
                products += 1
            else:
                tau[e.id] = 0.0
        phi[w] = math.fsum(tau[e.id] for e in ceg.out_edges[w])
        if products:
            vertex_ops += 1
    return CollectResult(tau, phi, OperationCounters(edge_ops, vertex_ops, 0))


def distribute(
    ceg: TransporterCeg, tau: dict[str, float], phi: dict[str, float],
    obs: CompatibleObservation,
) -> tuple[dict[str, float], OperationCounters]:
    allowed = obs.union
    pi_hat: dict[str, float] = {}
    divisions = 0
    for e in ceg.edges:
        denom = phi[e.source]
        if e.id in allowed and denom > 0:
            pi_hat[e.id] = tau[e.id] / denom
            divisions += 1
        else:
            pi_hat[e.id] = 0.0
    return pi_hat, OperationCounters(0, 0, divisions)


def propagate(ceg: TransporterCeg, obs: CompatibleObservation) -> PropagationResult:
    collected = collect(ceg, obs)
    if collected.phi[ceg.root] == 0:
        raise ZeroProbabilityError("observed event has prior probability zero")
    pi_hat, fwd = distribute(ceg, collected.tau, collected.phi, obs)
    return PropagationResult(
        collected.tau, collected.phi, pi_hat, collected.counters + fwd, obs, ceg
    )


def conditional_atom_probability(result: PropagationResult, atom: Atom) -> float:
    """Probability of a root-to-sink path given the observation.

    The product of revised edge probabilities is cross-checked against the
    potential/emphasis ratio whenever every emphasis on the path is positive.
    """
    ceg = result.ceg
    visited = path_positions(ceg, atom)
    product = 1.0
    for eid in atom:
        product *= result.pi_hat[eid]
    if product == 0:
        return 0.0
    phis = [result.phi[w] for w in visited[:-1]]
    if all(p > 0 for p in phis):
        ratio = math.prod(result.tau[eid] for eid in atom) / math.prod(phis)
        if abs(ratio - product) > INVARIANCE_TOLERANCE:
            raise ArithmeticError(
                f"invariance check failed on {atom}: {product!r} vs {ratio!r}"
            )
    return product


def conditional_reach_probability(
    ceg: TransporterCeg, result: PropagationResult, w: str
) -> float:
    if w not in ceg.out_edges:
        raise KeyError(f"unknown position {w}")
    return reach_probabilities(ceg, result.pi_hat)[w]


def reduce(ceg: TransporterCeg, result: PropagationResult) -> ReducedCeg:
    """Restrict the CEG to edges with positive revised probability.

    Positions with zero emphasis go, then anything no longer on a
    root-to-sink path. Surviving edges carry their revised probabilities.
    """
    if result.phi[ceg.root] == 0:
        raise ZeroProbabilityError("cannot reduce on a zero-probability event")
    keep_pos = {w for w in ceg.positions if result.phi[w] > 0}
    edges = [
        e for e in ceg.edges
        if result.pi_hat[e.id] > 0 and e.source in keep_pos and e.target in keep_pos
    ]

    fwd = {ceg.root}
    for w in ceg.topological_positions():
        if w in fwd:
            fwd.update(e.target for e in edges if e.source == w)
    bwd = {ceg.sink}
    for w in reversed(ceg.topological_positions()):
        if any(e.source == w and e.target in bwd for e in edges):
            bwd.add(w)
    live = keep_pos & fwd & bwd
    edges = [e for e in edges if e.source in live and e.target in live]

    positions = tuple(w for w in ceg.positions if w in live)
    new_edges = tuple(
        CegEdge(e.id, e.source, e.target, result.pi_hat[e.id], e.label) for e in edges
    )
    members = (
        {w: ceg.members[w] for w in positions if w in ceg.members}
        if ceg.members is not None else None
    )
    reduced = TransporterCeg(
        positions, new_edges, ceg.root, ceg.sink, ceg.name, members, None
    )
    return ReducedCeg(reduced, {w: w for w in positions})

