"""Probability trees: structure, validation, atoms and the transition matrix."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np

from .errors import InvalidPathError

SUM_TOLERANCE = 1e-9

Atom = tuple[str, ...]
"""A path given as the ordered tuple of its edge ids."""


@dataclass(frozen=True)
class TreeEdge:
    id: str
    source: str
    target: str
    prob: float
    label: str | None = None


@dataclass(frozen=True)
class ProbabilityTree:
    """A rooted event tree whose edges carry transition probabilities.

    Construction does not validate; call :func:`validate_tree` first when the
    input is untrusted. Vertex order is insertion order and every derived
    ordering (atoms, positions, representatives) follows it.
    """

    vertices: tuple[str, ...]
    edges: tuple[TreeEdge, ...]
    name: str | None = field(default=None, compare=False)

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[TreeEdge | tuple],
        vertices: Iterable[str] | None = None,
        name: str | None = None,
    ) -> ProbabilityTree:
        edge_list = [e if isinstance(e, TreeEdge) else TreeEdge(*e) for e in edges]
        if vertices is None:
            seen: dict[str, None] = {}
            for e in edge_list:
                seen.setdefault(e.source)
                seen.setdefault(e.target)
            vertices = seen
        return cls(tuple(vertices), tuple(edge_list), name)

    @cached_property
    def edge_by_id(self) -> dict[str, TreeEdge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def children(self) -> dict[str, tuple[TreeEdge, ...]]:
        out: dict[str, list[TreeEdge]] = {v: [] for v in self.vertices}
        for e in self.edges:
            out.setdefault(e.source, []).append(e)
        return {v: tuple(es) for v, es in out.items()}

    @cached_property
    def parent_edge(self) -> dict[str, TreeEdge]:
        return {e.target: e for e in self.edges}

    @cached_property
    def root(self) -> str:
        roots = [v for v in self.vertices if v not in self.parent_edge]
        if len(roots) != 1:
            raise ValueError(f"tree has {len(roots)} roots, expected 1")
        return roots[0]

    def is_leaf(self, v: str) -> bool:
        return not self.children[v]

    @property
    def situations(self) -> list[str]:
        return [v for v in self.vertices if self.children[v]]

    @property
    def leaves(self) -> list[str]:
        return [v for v in self.vertices if not self.children[v]]

    def bfs_order(self) -> list[str]:
        order = []
        queue = deque([self.root])
        while queue:
            v = queue.popleft()
            order.append(v)
            queue.extend(e.target for e in self.children[v])
        return order

    def postorder(self) -> list[str]:
        """Vertices with every child before its parent."""
        return self.bfs_order()[::-1]


def validate_tree(tree: ProbabilityTree) -> list[str]:
    """Return one message per violated tree invariant; empty means valid."""
    problems: list[str] = []
    vertex_set = set(tree.vertices)
    if len(vertex_set) != len(tree.vertices):
        problems.append("duplicate vertex ids")
    ids = [e.id for e in tree.edges]
    if len(set(ids)) != len(ids):
        problems.append("duplicate edge ids")

    incoming: dict[str, int] = {v: 0 for v in tree.vertices}
    for e in tree.edges:
        for end in (e.source, e.target):
            if end not in vertex_set:
                problems.append(f"edge {e.id} references unknown vertex {end}")
        if e.target in incoming:
            incoming[e.target] += 1
        if not (0.0 <= e.prob <= 1.0) or math.isnan(e.prob):
            problems.append(f"edge {e.id} probability {e.prob!r} outside [0, 1]")

    roots = [v for v, n in incoming.items() if n == 0]
    if len(roots) != 1:
        problems.append(f"expected exactly one root, found {len(roots)}")
    for v, n in incoming.items():
        if n > 1:
            problems.append(f"vertex {v} has {n} incoming edges")

    if len(roots) == 1 and not problems:
        reached = set()
        stack = [roots[0]]
        while stack:
            v = stack.pop()
            if v in reached:
                continue
            reached.add(v)
            stack.extend(e.target for e in tree.children[v])
        missing = [v for v in tree.vertices if v not in reached]
        if missing:
            problems.append(f"vertices unreachable from root: {', '.join(missing)}")
        if not tree.children[roots[0]]:
            problems.append("root has no outgoing edges")

    for v in tree.vertices:
        out = tree.children.get(v, ())
        if out:
            total = math.fsum(e.prob for e in out)
            if abs(total - 1.0) > SUM_TOLERANCE:
                where = "root" if roots == [v] else "vertex"
                problems.append(
                    f"out-probabilities sum {total!r} != 1 at {where} {v}"
                )
    return problems


def enumerate_atoms(tree: ProbabilityTree) -> list[Atom]:
    """All root-to-leaf paths, children visited in edge insertion order."""
    atoms: list[Atom] = []

    def walk(v: str, prefix: tuple[str, ...]) -> None:
        out = tree.children[v]
        if not out:
            atoms.append(prefix)
            return
        for e in out:
            walk(e.target, prefix + (e.id,))

    walk(tree.root, ())
    return atoms


def atom_probability(tree: ProbabilityTree, atom: Atom) -> float:
    v = tree.root
    p = 1.0
    for eid in atom:
        e = tree.edge_by_id.get(eid)
        if e is None or e.source != v:
            raise InvalidPathError(f"{eid} does not continue the path at {v}")
        p *= e.prob
        v = e.target
    if tree.children[v]:
        raise InvalidPathError(f"path ends at situation {v}, not a leaf")
    return p


class TransitionMatrix(NamedTuple):
    vertices: list[str]
    matrix: np.ndarray


def to_transition_matrix(tree: ProbabilityTree) -> TransitionMatrix:
    """Vertex-to-vertex transition matrix in breadth-first vertex order.

    Leaves are absorbing states with all-zero rows. BFS numbering is
    topological, so the matrix is strictly upper triangular.
    """
    order = tree.bfs_order()
    index = {v: i for i, v in enumerate(order)}
    mat = np.zeros((len(order), len(order)))
    for e in tree.edges:
        mat[index[e.source], index[e.target]] = e.prob
    return TransitionMatrix(order, mat)
