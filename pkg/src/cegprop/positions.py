"""Position partition of a probability tree and transporter CEG construction.

Two situations share a position when their rooted subtrees coincide in
topology and edge probabilities under some matching of children. Each vertex
gets a canonical form computed leaves-first: the sorted multiset of
``(child form, probability key, label key)`` triples over its outgoing edges.
Forms are interned in a dict keyed by that tuple, so equality is decided
structurally by tuple comparison; the hash only speeds up the lookup.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .ceg import SINK, CegEdge, TransporterCeg
from .tree import ProbabilityTree, TreeEdge

LEAF_FORM = 0


def _prob_key(p: float, tolerance: float):
    if tolerance <= 0:
        return p
    return round(p / tolerance)


def _edge_key(e: TreeEdge, forms: dict[str, int], match_labels: bool, tolerance: float):
    label = (e.label or "") if match_labels else ""
    return (forms[e.target], _prob_key(e.prob, tolerance), label)


def canonical_forms(
    tree: ProbabilityTree, match_labels: bool = True, tolerance: float = 0.0
) -> dict[str, int]:
    """Interned canonical form id for every vertex; all leaves get ``LEAF_FORM``."""
    interned: dict[tuple, int] = {(): LEAF_FORM}
    forms: dict[str, int] = {}
    for v in tree.postorder():
        key = tuple(
            sorted(_edge_key(e, forms, match_labels, tolerance) for e in tree.children[v])
        )
        forms[v] = interned.setdefault(key, len(interned))
    return forms


@dataclass(frozen=True)
class PositionPartition:
    """Situations grouped into positions.

    ``blocks`` are ordered by breadth-first discovery from the root block,
    following each block's representative (its first member in tree vertex
    order). Members inside a block keep tree vertex order.
    """

    blocks: tuple[tuple[str, ...], ...]
    leaves: tuple[str, ...]
    forms: dict[str, int]
    match_labels: bool = True
    tolerance: float = 0.0

    @property
    def block_of(self) -> dict[str, int]:
        return {v: i for i, block in enumerate(self.blocks) for v in block}

    def representative(self, i: int) -> str:
        return self.blocks[i][0]


def compute_positions(
    tree: ProbabilityTree, match_labels: bool = True, tolerance: float = 0.0
) -> PositionPartition:
    """Partition the situations of ``tree`` into positions.

    With ``match_labels`` off only topology and probabilities count. A
    positive ``tolerance`` quantises probabilities to that grid before
    comparing; the default compares floats exactly.
    """
    forms = canonical_forms(tree, match_labels, tolerance)
    groups: dict[int, list[str]] = {}
    for v in tree.vertices:
        if tree.children[v]:
            groups.setdefault(forms[v], []).append(v)

    ordered: list[tuple[str, ...]] = []
    seen = set()
    queue = deque([forms[tree.root]])
    seen.add(forms[tree.root])
    while queue:
        f = queue.popleft()
        block = tuple(groups[f])
        ordered.append(block)
        for e in tree.children[block[0]]:
            g = forms[e.target]
            if g != LEAF_FORM and g not in seen:
                seen.add(g)
                queue.append(g)
    return PositionPartition(
        tuple(ordered), tuple(tree.leaves), forms, match_labels, tolerance
    )


def _matched_children(
    tree: ProbabilityTree, v: str, partition: PositionPartition
) -> list[TreeEdge]:
    """Children of ``v`` sorted by canonical edge key (stable)."""
    return sorted(
        tree.children[v],
        key=lambda e: _edge_key(e, partition.forms, partition.match_labels,
                                partition.tolerance),
    )


def build_transporter_ceg(
    tree: ProbabilityTree,
    match_labels: bool = True,
    tolerance: float = 0.0,
    partition: PositionPartition | None = None,
) -> TransporterCeg:
    """Fold ``tree`` into its transporter CEG.

    Positions are named ``w0, w1, ...`` in partition order, plus the sink.
    Each position's edges copy those of its representative, keeping the
    representative's tree edge ids, so parallel edges stay distinct.
    """
    if partition is None:
        partition = compute_positions(tree, match_labels, tolerance)
    names = [f"w{i}" for i in range(len(partition.blocks))]
    block_of = partition.block_of

    def target_name(v: str) -> str:
        return SINK if tree.is_leaf(v) else names[block_of[v]]

    edges = []
    for i, block in enumerate(partition.blocks):
        for e in tree.children[block[0]]:
            edges.append(CegEdge(e.id, names[i], target_name(e.target), e.prob, e.label))

    tree_edges: dict[str, str] = {}
    for block in partition.blocks:
        rep_edges = _matched_children(tree, block[0], partition)
        for v in block:
            for mine, theirs in zip(_matched_children(tree, v, partition), rep_edges):
                tree_edges[mine.id] = theirs.id

    return TransporterCeg(
        positions=tuple(names) + (SINK,),
        edges=tuple(edges),
        root=names[0],
        sink=SINK,
        name=tree.name,
        members={names[i]: block for i, block in enumerate(partition.blocks)},
        tree_edges=tree_edges,
    )


def tree_atom_to_path(ceg: TransporterCeg, atom: tuple[str, ...]) -> tuple[str, ...]:
    """Image of a tree atom under the tree-to-CEG path bijection."""
    if ceg.tree_edges is None:
        raise ValueError("CEG carries no tree edge correspondence")
    return tuple(ceg.tree_edges[eid] for eid in atom)


def _signature(ceg: TransporterCeg, w: str, match_labels: bool):
    return tuple(
        sorted(
            (e.target, e.prob, (e.label or "") if match_labels else "")
            for e in ceg.out_edges[w]
        )
    )


def minimize_ceg(ceg: TransporterCeg, match_labels: bool = True) -> TransporterCeg:
    """Merge non-sink positions with identical outgoing edge multisets.

    Repeats until no merge applies. The earliest position in stored order
    survives each merge and edges into absorbed positions are redirected.
    """
    while True:
        keeper_of: dict[str, str] = {}
        first: dict[tuple, str] = {}
        for w in ceg.situations:
            sig = _signature(ceg, w, match_labels)
            if sig in first:
                keeper_of[w] = first[sig]
            else:
                first[sig] = w
        if not keeper_of:
            return ceg
        ceg = _merge(ceg, keeper_of, match_labels)


def _merge(ceg: TransporterCeg, keeper_of: dict[str, str], match_labels: bool):
    def key(e: CegEdge):
        return (e.target, e.prob, (e.label or "") if match_labels else "")

    edges = tuple(
        CegEdge(e.id, e.source, keeper_of.get(e.target, e.target), e.prob, e.label)
        for e in ceg.edges
        if e.source not in keeper_of
    )
    members = None
    if ceg.members is not None:
        members = {w: tuple(ceg.members.get(w, ())) for w in ceg.positions
                   if w not in keeper_of}
        for w, k in keeper_of.items():
            members[k] = members[k] + tuple(ceg.members.get(w, ()))
    tree_edges = None
    if ceg.tree_edges is not None:
        renamed: dict[str, str] = {}
        for w, k in keeper_of.items():
            mine = sorted(ceg.out_edges[w], key=key)
            theirs = sorted(ceg.out_edges[k], key=key)
            renamed.update({a.id: b.id for a, b in zip(mine, theirs)})
        tree_edges = {t: renamed.get(c, c) for t, c in ceg.tree_edges.items()}
    return TransporterCeg(
        positions=tuple(w for w in ceg.positions if w not in keeper_of),
        edges=edges,
        root=ceg.root,
        sink=ceg.sink,
        name=ceg.name,
        members=members,
        tree_edges=tree_edges,
    )
